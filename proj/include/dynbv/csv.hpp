#pragma once

/// @file csv.hpp
/// @brief Minimal CSV writing/reading for the flat numeric tables we emit.
///
/// Fields never contain commas or quotes, so no quoting is performed.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

namespace dynbv::csv {

/// Shortest round-trip decimal form; "inf" for +infinity, "NA" for NaN.
[[nodiscard]] inline std::string format_double(double v) {
    if (std::isnan(v)) {
        return "NA";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

[[nodiscard]] inline std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
}

[[nodiscard]] inline double parse_double(std::string_view s) {
    if (s == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    if (s == "NA") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("csv: not a number: '" + std::string(s) + "'");
    }
    return v;
}

[[nodiscard]] inline std::uint64_t parse_uint(std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("csv: not an unsigned integer: '" + std::string(s) + "'");
    }
    return v;
}

[[nodiscard]] inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

/// Opens a file for writing or throws std::runtime_error naming the path.
[[nodiscard]] inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    return out;
}

/// A parsed CSV file with named columns.
class Table {
public:
    static Table read(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw std::runtime_error("cannot read '" + path + "'");
        }
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    static Table parse(const std::string& text, const std::string& origin = "<memory>") {
        Table t;
        std::istringstream in(text);
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty()) {
                continue;
            }
            auto fields = split(line);
            if (header) {
                t.header_ = std::move(fields);
                for (std::size_t i = 0; i < t.header_.size(); ++i) {
                    t.index_[t.header_[i]] = i;
                }
                header = false;
                continue;
            }
            if (fields.size() != t.header_.size()) {
                throw std::runtime_error(origin + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                                         std::to_string(t.header_.size()));
            }
            t.rows_.push_back(std::move(fields));
        }
        if (header) {
            throw std::runtime_error(origin + ": missing header line");
        }
        return t;
    }

    [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_.size(); }

    [[nodiscard]] std::size_t column(const std::string& name) const {
        const auto it = index_.find(name);
        if (it == index_.end()) {
            throw std::runtime_error("csv: missing column '" + name + "'");
        }
        return it->second;
    }

    [[nodiscard]] const std::string& at(std::size_t row, const std::string& name) const {
        return rows_.at(row).at(column(name));
    }

private:
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace dynbv::csv
