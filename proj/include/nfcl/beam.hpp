#pragma once

// Electron-beam geometry: where the primary electron stops inside the fiber
// cross-section, and the Gaussian blur standing in for the secondary
// electron cascade.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "nfcl/errors.hpp"

namespace nfcl {

struct BeamConfig {
    std::optional<double> energy_kev; // informational once delta is resolved
    double delta = 10e-9;             // penetration depth, m
    double sigma_cascade = 10e-9;     // Gaussian standard deviation, m
    double y = 0.0;                   // transverse spot position, m

    void validate() const {
        if (!(delta >= 0.0) || !std::isfinite(delta)) {
            throw DomainError("penetration depth must be finite and non-negative");
        }
        if (!(sigma_cascade >= 0.0) || !std::isfinite(sigma_cascade)) {
            throw DomainError("cascade sigma must be finite and non-negative");
        }
        if (!std::isfinite(y)) {
            throw DomainError("beam position must be finite");
        }
    }
};

/// Energy (keV) to penetration depth (m) rows. Lookup is exact-match only.
struct PenetrationTable {
    std::vector<std::pair<double, double>> rows;

    [[nodiscard]] std::optional<double> find(double energy_kev) const {
        for (const auto& [e, d] : rows) {
            if (std::abs(e - energy_kev) <= 1e-9 * std::max(1.0, std::abs(e))) {
                return d;
            }
        }
        return std::nullopt;
    }

    static PenetrationTable builtin() { return {{{0.5, 10e-9}, {2.0, 175e-9}}}; }
};

/// Penetration depth for a beam energy. A user table takes precedence over
/// the built-in defaults; there is no interpolation between rows.
inline double penetration_depth(double energy_kev, const PenetrationTable* table = nullptr) {
    if (!(energy_kev > 0.0) || !std::isfinite(energy_kev)) {
        throw DomainError("beam energy must be positive");
    }
    if (table != nullptr) {
        if (auto d = table->find(energy_kev)) {
            return *d;
        }
    }
    if (auto d = PenetrationTable::builtin().find(energy_kev)) {
        return *d;
    }
    std::ostringstream msg;
    msg << "no penetration depth for " << energy_kev
        << " keV (built-in: 0.5, 2.0 keV; supply a table for other energies)";
    throw UnsupportedEnergy(msg.str());
}

struct StoppingPoint {
    double r = 0.0;     // distance from the fiber axis, m
    double theta = 0.0; // polar angle in the cross-section, rad
    bool inside = false;
};

/// Stopping point of an electron entering at transverse offset y and
/// travelling a depth delta along the beam direction. Returns nullopt when
/// |y| > a (the beam misses the fiber).
///
/// phi = asin(y/a), r = sqrt(y^2 + (a cos(phi) - delta)^2),
/// theta = pi/2 - acos(y/r).
inline std::optional<StoppingPoint> stopping_point(double a, double y, double delta) {
    if (!(a > 0.0) || !(delta >= 0.0)) {
        throw DomainError("stopping_point needs a > 0 and delta >= 0");
    }
    if (std::abs(y) > a) {
        return std::nullopt;
    }
    // a cos(phi), symmetric in y by construction.
    const double chord_half = std::sqrt((a - y) * (a + y));
    StoppingPoint p;
    p.r = (delta == 0.0) ? a : std::hypot(y, chord_half - delta);
    if (p.r > 0.0) {
        p.theta = std::numbers::pi / 2.0 - std::acos(std::clamp(y / p.r, -1.0, 1.0));
    }
    p.inside = delta <= 2.0 * chord_half && p.r <= a;
    return p;
}

/// Discrete convolution with a unit-mass Gaussian kernel sampled on the
/// profile grid and truncated at +-5 sigma. Values beyond the grid are zero.
inline std::vector<double> cascade_convolve(std::span<const double> x, std::span<const double> values,
                                            double sigma) {
    if (x.size() != values.size()) {
        throw DomainError("profile abscissa and values differ in length");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw DomainError("cascade sigma must be finite and non-negative");
    }
    std::vector<double> out(values.begin(), values.end());
    if (sigma == 0.0 || x.size() < 2) {
        return out;
    }
    const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (std::abs((x[i] - x[i - 1]) - dx) > 1e-6 * dx) {
            throw DomainError("cascade convolution needs a uniform grid");
        }
    }
    if (dx > 0.5 * sigma * (1.0 + 1e-12)) {
        throw DomainError("grid spacing exceeds sigma/2; refine the profile grid");
    }

    // Slack keeps a sample lying exactly at 5 sigma despite rounding in dx.
    const auto half = static_cast<std::ptrdiff_t>(std::floor(5.0 * sigma / dx * (1.0 + 1e-9)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    double mass = 0.0;
    for (std::ptrdiff_t j = -half; j <= half; ++j) {
        const double t = static_cast<double>(j) * dx / sigma;
        kernel[static_cast<std::size_t>(j + half)] = std::exp(-0.5 * t * t);
        mass += kernel[static_cast<std::size_t>(j + half)];
    }
    for (double& k : kernel) {
        k /= mass;
    }

    const auto n = static_cast<std::ptrdiff_t>(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t j = -half; j <= half; ++j) {
            const std::ptrdiff_t src = i - j;
            if (src >= 0 && src < n) {
                acc += kernel[static_cast<std::size_t>(j + half)] * values[static_cast<std::size_t>(src)];
            }
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

} // namespace nfcl
