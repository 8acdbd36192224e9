#pragma once

// Plain-text inputs: data vectors (CSV column or JSON array), finite-law JSON
// documents {"support": [...], "weights": [...]}, and distribution strings.

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dmoments/distributions.hpp"
#include "dmoments/finite_distribution.hpp"

namespace dmoments {

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// One numeric column per line; an optional non-numeric first line is a header.
/// With several comma-separated fields, `column` picks one (0-based).
inline std::vector<double> parse_csv_column(std::string_view text, std::size_t column = 0)
{
    std::vector<double> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first_record = true;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const auto line = detail::trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::string_view field = line;
        for (std::size_t c = 0; c < column; ++c) {
            const auto comma = field.find(',');
            if (comma == std::string_view::npos) {
                throw InputError("CSV line " + std::to_string(line_no) + ": no column " +
                                 std::to_string(column));
            }
            field = field.substr(comma + 1);
        }
        field = detail::trim(field.substr(0, field.find(',')));
        const bool header_allowed = first_record;
        first_record = false;
        try {
            out.push_back(detail::parse_real(field, "CSV"));
        } catch (const std::invalid_argument&) {
            if (header_allowed) {
                continue;
            }
            throw InputError("CSV line " + std::to_string(line_no) + ": not a number: '" +
                             std::string(field) + "'");
        }
    }
    return out;
}

inline std::vector<double> parse_json_vector(std::string_view text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_array()) {
        throw InputError("JSON data must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw InputError("JSON data must be an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

/// Reads a data vector; `.json` files (or content starting with '[') are JSON, others CSV.
inline std::vector<double> read_data_vector(const std::string& path, std::size_t column = 0)
{
    const auto text = read_text_file(path);
    const auto body = detail::trim(text);
    const bool json = (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) ||
                      (!body.empty() && body.front() == '[');
    return json ? parse_json_vector(body) : parse_csv_column(body, column);
}

inline FiniteDistribution<double> parse_finite_distribution(std::string_view text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("malformed finite-distribution JSON: ") + e.what());
    }
    const auto numbers = [&j](const char* key) {
        if (!j.is_object() || !j.contains(key) || !j[key].is_array()) {
            throw InputError(std::string("finite-distribution JSON needs an array \"") + key + "\"");
        }
        std::vector<double> v;
        for (const auto& e : j[key]) {
            if (!e.is_number()) {
                throw InputError(std::string("finite-distribution JSON: non-numeric entry in \"") +
                                 key + "\"");
            }
            v.push_back(e.get<double>());
        }
        return v;
    };
    auto support = numbers("support");
    auto weights = numbers("weights");
    try {
        return FiniteDistribution<double>(std::move(support), std::move(weights));
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("finite-distribution JSON: ") + e.what());
    }
}

inline nlohmann::json to_json(const FiniteDistribution<double>& law)
{
    return nlohmann::json{{"support", law.support()}, {"weights", law.weights()}};
}

/// "2..8" (inclusive), "3,5,7" or a mix such as "2..4,8".
inline std::vector<long long> parse_int_list(std::string_view text)
{
    std::vector<long long> out;
    const auto parse_one = [](std::string_view t) {
        t = detail::trim(t);
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
            throw std::invalid_argument("not an integer: '" + std::string(t) + "'");
        }
        return v;
    };
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) {
            comma = text.size();
        }
        const auto item = text.substr(pos, comma - pos);
        pos = comma + 1;
        const auto dots = item.find("..");
        if (dots == std::string_view::npos) {
            out.push_back(parse_one(item));
            continue;
        }
        const long long a = parse_one(item.substr(0, dots));
        const long long b = parse_one(item.substr(dots + 2));
        if (b < a) {
            throw std::invalid_argument("empty range '" + std::string(item) + "'");
        }
        for (long long v = a; v <= b; ++v) {
            out.push_back(v);
        }
    }
    return out;
}

/// "exp:RATE", "normal:MEAN,SD" or "finite:@PATH".
inline DistributionSpec parse_distribution_spec(std::string_view text)
{
    constexpr std::string_view finite_prefix = "finite:@";
    if (text.substr(0, finite_prefix.size()) == finite_prefix) {
        const std::string path(text.substr(finite_prefix.size()));
        return DistributionSpec::finite(parse_finite_distribution(read_text_file(path)));
    }
    return parse_parametric_spec(text);
}

}  // namespace dmoments
