#pragma once

#include "dmoments/compensated_sum.hpp"
#include "dmoments/distributions.hpp"
#include "dmoments/errors.hpp"
#include "dmoments/estimators.hpp"
#include "dmoments/exact_expectation.hpp"
#include "dmoments/finite_distribution.hpp"
#include "dmoments/identities.hpp"
#include "dmoments/identity_catalog.hpp"
#include "dmoments/io.hpp"
#include "dmoments/kernels.hpp"
#include "dmoments/parallel.hpp"
#include "dmoments/rng.hpp"
#include "dmoments/simulation.hpp"
