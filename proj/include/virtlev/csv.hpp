#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "virtlev/core.hpp"

namespace virtlev {

/// 15 significant digits, the precision of every number the tools emit.
inline std::string fmt(double v) {
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// CSV table preceded by a "# key = value" echo of the resolved configuration.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void row(const std::vector<double>& values) {
        if (values.size() != columns_.size()) fail(ErrorKind::Dimension, "CsvTable: row width mismatch");
        rows_.push_back(values);
    }

    std::size_t size() const noexcept { return rows_.size(); }

    void write(std::ostream& os, const ConfigEcho& config) const {
        for (const auto& [k, v] : config) os << "# " << k << " = " << v << '\n';
        for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
        os << '\n';
        for (const auto& r : rows_) {
            for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << fmt(r[c]);
            os << '\n';
        }
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

} // namespace virtlev
