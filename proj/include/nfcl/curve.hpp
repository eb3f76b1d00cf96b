#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nfcl/errors.hpp"

namespace nfcl {

struct ColumnSpec {
    std::string name;
    std::string unit; // "1" for dimensionless
};

/// Column-oriented table with a fixed declared schema. Columns may be set in
/// any order; output always follows the schema. The first column is the
/// abscissa.
class Curve {
public:
    Curve() = default;
    explicit Curve(std::vector<ColumnSpec> schema)
        : schema_(std::move(schema)), data_(schema_.size()) {}

    [[nodiscard]] const std::vector<ColumnSpec>& schema() const { return schema_; }
    [[nodiscard]] std::size_t column_count() const { return schema_.size(); }

    [[nodiscard]] std::size_t rows() const {
        std::size_t n = 0;
        for (const auto& col : data_) {
            n = std::max(n, col.size());
        }
        return n;
    }

    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const {
        for (std::size_t i = 0; i < schema_.size(); ++i) {
            if (schema_[i].name == name) {
                return i;
            }
        }
        return std::nullopt;
    }

    void set(std::string_view name, std::vector<double> values) {
        const auto idx = index_of(name);
        if (!idx) {
            throw DomainError("curve has no column named '" + std::string(name) + "'");
        }
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (i != *idx && !data_[i].empty() && data_[i].size() != values.size()) {
                throw DomainError("column '" + std::string(name) + "' length " +
                                  std::to_string(values.size()) + " does not match curve rows " +
                                  std::to_string(data_[i].size()));
            }
        }
        data_[*idx] = std::move(values);
    }

    [[nodiscard]] const std::vector<double>& column(std::string_view name) const {
        const auto idx = index_of(name);
        if (!idx) {
            throw DomainError("curve has no column named '" + std::string(name) + "'");
        }
        return data_[*idx];
    }

    [[nodiscard]] const std::vector<double>& column(std::size_t i) const { return data_.at(i); }

    /// Free-form provenance lines, written as '#' comments.
    std::vector<std::string> comments;

private:
    std::vector<ColumnSpec> schema_;
    std::vector<std::vector<double>> data_;
};

/// Divides values by their maximum; the output maximum is exactly 1.
inline std::vector<double> normalize_to_unit_max(std::span<const double> values) {
    if (values.empty()) {
        throw DomainError("cannot normalize an empty curve");
    }
    const double peak = *std::max_element(values.begin(), values.end());
    if (!(peak > 0.0) || !std::isfinite(peak)) {
        throw DomainError("cannot normalize a curve without a strictly positive maximum");
    }
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) {
        v /= peak;
    }
    return out;
}

/// Returns a copy of `curve` with `column` normalized to unit maximum.
inline Curve normalize_curve(const Curve& curve, std::string_view column) {
    Curve out = curve;
    out.set(column, normalize_to_unit_max(curve.column(column)));
    return out;
}

struct Peak {
    std::size_t index = 0; // grid argmax
    double x = 0.0;        // parabolic refinement through the three nodes around the argmax
    double value = 0.0;
};

inline Peak locate_peak(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty()) {
        throw DomainError("peak search needs equal-length, non-empty abscissa and values");
    }
    Peak p;
    p.index = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    p.x = x[p.index];
    p.value = y[p.index];
    if (p.index == 0 || p.index + 1 == x.size()) {
        return p;
    }
    const double x0 = x[p.index - 1], x1 = x[p.index], x2 = x[p.index + 1];
    const double y0 = y[p.index - 1], y1 = y[p.index], y2 = y[p.index + 1];
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (curv >= 0.0) {
        return p;
    }
    // Vertex of the interpolating parabola.
    const double vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    p.x = std::clamp(vertex, x0, x2);
    p.value = y1 + d01 * (p.x - x1) + curv * (p.x - x0) * (p.x - x1);
    return p;
}

/// Full width at half maximum by linear interpolation of the half-level
/// crossings around the argmax. When a side never drops to half maximum on
/// the grid, the grid end is used and the width is a lower bound.
struct HalfWidth {
    double width = 0.0;
    double left = 0.0;
    double right = 0.0;
    bool left_bracketed = false;
    bool right_bracketed = false;

    [[nodiscard]] bool bracketed() const { return left_bracketed && right_bracketed; }
};

inline HalfWidth full_width_half_max(std::span<const double> x, std::span<const double> y) {
    const Peak p = locate_peak(x, y);
    const double half = 0.5 * y[p.index];
    HalfWidth hw;
    hw.left = x.front();
    for (std::size_t i = p.index; i > 0; --i) {
        if (y[i - 1] < half) {
            const double t = (half - y[i - 1]) / (y[i] - y[i - 1]);
            hw.left = x[i - 1] + t * (x[i] - x[i - 1]);
            hw.left_bracketed = true;
            break;
        }
    }
    hw.right = x.back();
    for (std::size_t i = p.index; i + 1 < x.size(); ++i) {
        if (y[i + 1] < half) {
            const double t = (y[i] - half) / (y[i] - y[i + 1]);
            hw.right = x[i] + t * (x[i + 1] - x[i]);
            hw.right_bracketed = true;
            break;
        }
    }
    hw.width = hw.right - hw.left;
    return hw;
}

} // namespace nfcl
