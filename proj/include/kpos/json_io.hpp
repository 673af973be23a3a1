#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "kpos/lti.hpp"

namespace kpos {

/// Strict parser for the system file format:
///   { "time": "discrete" | "continuous",
///     "A": [[...], ...], "b": [...], "c": [...] }
/// A must be square with rectangular rows, b and c must match its dimension,
/// every number must be finite, and unknown keys are rejected.
inline StateSpace system_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("system: top level must be an object");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (key != "time" && key != "A" && key != "b" && key != "c")
            throw std::invalid_argument("system: unknown key '" + key + "'");
    }
    for (const char* key : {"time", "A", "b", "c"})
        if (!doc.contains(key))
            throw std::invalid_argument(std::string("system: missing key '") + key + "'");

    const auto& time = doc.at("time");
    if (!time.is_string() || (time != "discrete" && time != "continuous"))
        throw std::invalid_argument("system: 'time' must be \"discrete\" or \"continuous\"");
    const TimeDomain domain =
        time == "discrete" ? TimeDomain::discrete : TimeDomain::continuous;

    const auto read_number = [](const nlohmann::json& v, const char* where) {
        if (!v.is_number())
            throw std::invalid_argument(std::string("system: non-numeric entry in ") + where);
        const double x = v.get<double>();
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string("system: non-finite entry in ") + where);
        return x;
    };

    const auto& ja = doc.at("A");
    if (!ja.is_array() || ja.empty()) throw std::invalid_argument("system: 'A' must be an array of rows");
    const std::size_t n = ja.size();
    Matrix A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = ja.at(i);
        if (!row.is_array() || row.size() != n)
            throw std::invalid_argument("system: 'A' must be square with rectangular rows");
        for (std::size_t j = 0; j < n; ++j)
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                read_number(row.at(j), "A");
    }
    const auto read_vector = [&](const char* key) {
        const auto& jv = doc.at(key);
        if (!jv.is_array() || jv.size() != n)
            throw std::invalid_argument(std::string("system: '") + key +
                                        "' must be an array of length n");
        Vector v(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            v(static_cast<Eigen::Index>(i)) = read_number(jv.at(i), key);
        return v;
    };
    const Vector b = read_vector("b");
    const Vector c = read_vector("c");
    return make_state_space(std::move(A), b, c.transpose(), domain);
}

inline StateSpace parse_system(const std::string& text) {
    return system_from_json(nlohmann::json::parse(text));
}

inline StateSpace load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open system file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_system(buf.str());
}

inline nlohmann::json to_json(const StateSpace& sys) {
    nlohmann::json doc;
    doc["time"] = sys.is_discrete() ? "discrete" : "continuous";
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < sys.A.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < sys.A.cols(); ++j) row.push_back(sys.A(i, j));
        rows.push_back(std::move(row));
    }
    doc["A"] = std::move(rows);
    doc["b"] = std::vector<double>(sys.b.data(), sys.b.data() + sys.b.size());
    doc["c"] = std::vector<double>(sys.c.data(), sys.c.data() + sys.c.size());
    return doc;
}

/// Parses a plain 2-D JSON array into a matrix (used for transform files).
inline Matrix parse_matrix(const nlohmann::json& doc) {
    if (!doc.is_array() || doc.empty())
        throw std::invalid_argument("matrix: expected a non-empty 2-D array");
    const std::size_t rows = doc.size();
    const auto& first = doc.at(0);
    if (!first.is_array() || first.empty())
        throw std::invalid_argument("matrix: expected a non-empty 2-D array");
    const std::size_t cols = first.size();
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const auto& row = doc.at(i);
        if (!row.is_array() || row.size() != cols)
            throw std::invalid_argument("matrix: rows must have equal length");
        for (std::size_t j = 0; j < cols; ++j) {
            const auto& v = row.at(j);
            if (!v.is_number()) throw std::invalid_argument("matrix: non-numeric entry");
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.get<double>();
        }
    }
    if (!M.allFinite()) throw std::invalid_argument("matrix: non-finite entry");
    return M;
}

inline Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open matrix file: " + path);
    nlohmann::json doc;
    in >> doc;
    return parse_matrix(doc);
}

}  // namespace kpos
