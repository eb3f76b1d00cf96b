#pragma once

// Synthetic versions of the measurements: spot scans across the fiber,
// diameter sweeps, shot noise, and the two curve fits (scan model with
// free amplitude/offset, Lorentzian emission line).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nfcl/beam.hpp"
#include "nfcl/curve.hpp"
#include "nfcl/errors.hpp"
#include "nfcl/fiber.hpp"
#include "nfcl/fit.hpp"
#include "nfcl/pldos.hpp"

namespace nfcl {

enum class ScanAxis { y_position, size_param_s, wavelength };

inline const char* to_string(ScanAxis axis) {
    switch (axis) {
    case ScanAxis::y_position: return "y";
    case ScanAxis::size_param_s: return "s";
    case ScanAxis::wavelength: return "wavelength";
    }
    return "unknown";
}

struct ScanProvenance {
    std::optional<FiberSpec> fiber;
    std::optional<BeamConfig> beam;
};

/// Measured or simulated curve over one abscissa. Abscissas are SI (m) for
/// y_position and wavelength, dimensionless for size_param_s.
struct ScanCurve {
    ScanAxis axis = ScanAxis::y_position;
    std::vector<double> x;
    std::vector<double> value;
    std::optional<std::vector<double>> uncertainty;
    ScanProvenance meta;

    [[nodiscard]] std::size_t size() const { return x.size(); }

    void validate() const {
        if (x.size() != value.size() || (uncertainty && uncertainty->size() != x.size())) {
            throw DomainError("scan columns differ in length");
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!std::isfinite(x[i]) || !std::isfinite(value[i])) {
                throw DomainError("scan contains non-finite samples");
            }
            if (i > 0 && !(x[i] > x[i - 1])) {
                throw DomainError("scan abscissas must be strictly increasing");
            }
            if (uncertainty && !((*uncertainty)[i] >= 0.0)) {
                throw DomainError("scan uncertainties must be non-negative");
            }
        }
    }
};

/// Uniform y-grid spanning the fiber plus five cascade widths each side,
/// with spacing no larger than `max_spacing`.
inline std::vector<double> cross_scan_grid(double a, double sigma, double max_spacing) {
    const double half = a + 5.0 * sigma;
    const auto intervals = static_cast<std::size_t>(std::ceil(2.0 * half / max_spacing));
    return uniform_grid(-half, half, std::max<std::size_t>(intervals, 2) + 1);
}

/// Cross-section spot scan: emission at the electron stopping point,
/// weighted by the PLDOS there (zero when the stopping point is outside the
/// core or the beam misses), blurred by the cascade Gaussian and, when
/// `normalize` is set, scaled to unit maximum.
inline ScanCurve simulate_cross_scan(const FiberSpec& spec, const BeamConfig& beam,
                                     std::span<const double> y_grid, bool normalize = true) {
    spec.validate();
    beam.validate();
    const double a = spec.radius;
    if (y_grid.size() < 2 || y_grid.front() > -a * (1.0 - 1e-12) || y_grid.back() < a * (1.0 - 1e-12)) {
        throw DomainError("cross-scan grid must cover [-a, a]");
    }
    const ModeSolution mode = solve_he11(spec);
    const double v_g = group_velocity(spec);

    std::vector<double> raw(y_grid.size(), 0.0);
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
        const auto stop = stopping_point(a, y_grid[i], beam.delta);
        if (stop && stop->inside) {
            raw[i] = pldos_at(mode, v_g, stop->r).rho_g;
        }
    }

    ScanCurve out;
    out.axis = ScanAxis::y_position;
    out.x.assign(y_grid.begin(), y_grid.end());
    out.value = cascade_convolve(y_grid, raw, beam.sigma_cascade);
    if (normalize) {
        out.value = normalize_to_unit_max(out.value);
    }
    out.meta.fiber = spec;
    out.meta.beam = beam;
    return out;
}

/// rho_bar versus s = k d / 2 at fixed beam offset and depth. The base
/// spec's radius is replaced by each diameter / 2.
inline ScanCurve simulate_diameter_sweep(std::span<const double> diameters, const BeamConfig& beam,
                                         const FiberSpec& base, bool normalize = true) {
    beam.validate();
    if (diameters.empty()) {
        throw DomainError("diameter list is empty");
    }
    for (std::size_t i = 0; i < diameters.size(); ++i) {
        if (!(diameters[i] > 0.0) || (i > 0 && !(diameters[i] > diameters[i - 1]))) {
            throw DomainError("diameters must be positive and strictly increasing");
        }
    }
    const RadialRule rule = RadialRule::fixed_point(beam.delta, beam.y);
    ScanCurve out;
    out.axis = ScanAxis::size_param_s;
    out.meta.fiber = base;
    out.meta.beam = beam;
    for (double d : diameters) {
        const FiberSpec spec = base.with_radius(0.5 * d);
        out.x.push_back(spec.size_parameter());
        const auto r = resolve_radius(rule, spec.radius);
        if (!r) {
            out.value.push_back(0.0);
            continue;
        }
        try {
            const ModeSolution mode = solve_he11(spec);
            out.value.push_back(pldos_at(mode, group_velocity(spec), *r).rho_g);
        } catch (const SolverError& e) {
            throw SolverError("diameter sweep failed at d = " + std::to_string(d * 1e9) + " nm: " +
                              e.what());
        }
    }
    if (normalize) {
        out.value = normalize_to_unit_max(out.value);
    }
    return out;
}

/// Replaces each value v by Poisson(v N / max) / N with N = counts_at_max and
/// records sqrt(mean) / N as its uncertainty. Deterministic for a given seed.
inline ScanCurve add_shot_noise(const ScanCurve& curve, std::int64_t counts_at_max,
                                std::uint64_t seed) {
    if (counts_at_max <= 0) {
        throw DomainError("counts_at_max must be positive");
    }
    if (curve.value.empty()) {
        throw DomainError("cannot add noise to an empty curve");
    }
    const double peak = *std::max_element(curve.value.begin(), curve.value.end());
    if (!(peak > 0.0)) {
        throw DomainError("shot noise needs a curve with a positive maximum");
    }
    const auto n = static_cast<double>(counts_at_max);
    std::mt19937_64 rng(seed);
    ScanCurve out = curve;
    out.uncertainty = std::vector<double>(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double v = curve.value[i];
        if (v < 0.0) {
            throw DomainError("shot noise needs non-negative values");
        }
        const double mean = v * n / peak;
        double draw = 0.0;
        if (mean > 0.0) {
            std::poisson_distribution<std::int64_t> poisson(mean);
            draw = static_cast<double>(poisson(rng));
        }
        out.value[i] = draw / n;
        (*out.uncertainty)[i] = std::sqrt(mean) / n;
    }
    return out;
}

/// amplitude * model(y - offset), linearly interpolated, zero outside the
/// model's abscissa range. Offset in meters.
inline double evaluate_scan_model(const ScanCurve& model, double y, double amplitude, double offset) {
    const double t = y - offset;
    const auto& xs = model.x;
    if (xs.empty() || t < xs.front() || t > xs.back()) {
        return 0.0;
    }
    auto it = std::upper_bound(xs.begin(), xs.end(), t);
    if (it == xs.end()) {
        return amplitude * model.value.back();
    }
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double frac = (t - xs[lo]) / (xs[hi] - xs[lo]);
    return amplitude * (model.value[lo] + frac * (model.value[hi] - model.value[lo]));
}

/// Fine-grid scan model for fit_scan, built from the data's provenance.
inline ScanCurve scan_model(const FiberSpec& spec, const BeamConfig& beam,
                            double max_spacing = 1e-9) {
    const double spacing =
        beam.sigma_cascade > 0.0 ? std::min(max_spacing, 0.5 * beam.sigma_cascade) : max_spacing;
    return simulate_cross_scan(spec, beam, cross_scan_grid(spec.radius, beam.sigma_cascade, spacing));
}

namespace detail {

/// Residual weights 1/sigma_i. Zero-uncertainty samples (zero Poisson mean)
/// take the smallest positive uncertainty in the data.
inline std::optional<std::vector<double>> residual_weights(const ScanCurve& data) {
    if (!data.uncertainty) {
        return std::nullopt;
    }
    double floor = 0.0;
    for (double u : *data.uncertainty) {
        if (u > 0.0 && (floor == 0.0 || u < floor)) {
            floor = u;
        }
    }
    if (floor == 0.0) {
        return std::nullopt;
    }
    std::vector<double> w(data.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = 1.0 / std::max((*data.uncertainty)[i], floor);
    }
    return w;
}

} // namespace detail

/// Least-squares fit of amplitude and center offset of a fixed scan model.
/// Parameters: "amplitude", "offset_nm".
inline FitResult fit_scan(const ScanCurve& data, const ScanCurve& model, const FitOptions& opt = {}) {
    data.validate();
    model.validate();
    if (data.size() < 5) {
        throw DomainError("scan fit needs at least 5 points");
    }
    const auto weights = detail::residual_weights(data);
    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double pred = evaluate_scan_model(model, data.x[i], p[0], p[1] * 1e-9);
            const double wi = weights ? (*weights)[i] : 1.0;
            r[static_cast<Eigen::Index>(i)] = wi * (pred - data.value[i]);
        }
        return r;
    };

    // Start: amplitude from the maxima, offset from the centroid difference.
    const double data_max = *std::max_element(data.value.begin(), data.value.end());
    const double model_max = *std::max_element(model.value.begin(), model.value.end());
    auto centroid = [](const ScanCurve& c) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            num += c.x[i] * std::max(c.value[i], 0.0);
            den += std::max(c.value[i], 0.0);
        }
        return den > 0.0 ? num / den : 0.0;
    };
    Eigen::VectorXd p0(2);
    p0 << data_max / model_max, (centroid(data) - centroid(model)) * 1e9;
    Eigen::VectorXd typical(2);
    typical << std::max(std::abs(p0[0]), 1e-12), 1.0;
    return levenberg_marquardt(residuals, p0, {"amplitude", "offset_nm"}, typical,
                               weights.has_value(), opt);
}

/// L(lambda) = A (G/2)^2 / ((lambda - lambda0)^2 + (G/2)^2), lengths in nm.
inline double lorentzian(double lambda_nm, double amplitude, double center_nm, double fwhm_nm) {
    const double hw = 0.5 * fwhm_nm;
    const double d = lambda_nm - center_nm;
    return amplitude * hw * hw / (d * d + hw * hw);
}

inline ScanCurve lorentzian_spectrum(std::span<const double> wavelengths, double amplitude,
                                     double center, double fwhm) {
    ScanCurve out;
    out.axis = ScanAxis::wavelength;
    out.x.assign(wavelengths.begin(), wavelengths.end());
    for (double l : wavelengths) {
        out.value.push_back(lorentzian(l * 1e9, amplitude, center * 1e9, fwhm * 1e9));
    }
    return out;
}

/// Three-parameter Lorentzian fit. Parameters: "amplitude", "center_nm",
/// "fwhm_nm" (reported non-negative).
inline FitResult fit_lorentzian(const ScanCurve& spectrum, const FitOptions& opt = {}) {
    spectrum.validate();
    if (spectrum.size() < 7) {
        throw DomainError("Lorentzian fit needs at least 7 points");
    }
    std::vector<double> x_nm(spectrum.size());
    for (std::size_t i = 0; i < x_nm.size(); ++i) {
        x_nm[i] = spectrum.x[i] * 1e9;
    }
    const HalfWidth hw = full_width_half_max(x_nm, spectrum.value);
    if (!hw.bracketed()) {
        throw DomainError("spectrum does not span one full width at half maximum");
    }
    const Peak peak = locate_peak(x_nm, spectrum.value);

    const auto weights = detail::residual_weights(spectrum);
    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(x_nm.size()));
        for (std::size_t i = 0; i < x_nm.size(); ++i) {
            const double wi = weights ? (*weights)[i] : 1.0;
            r[static_cast<Eigen::Index>(i)] =
                wi * (lorentzian(x_nm[i], p[0], p[1], p[2]) - spectrum.value[i]);
        }
        return r;
    };
    Eigen::VectorXd p0(3);
    p0 << peak.value, peak.x, hw.width;
    Eigen::VectorXd typical(3);
    typical << std::max(std::abs(peak.value), 1e-12), 1.0, 1.0;
    FitResult fit =
        levenberg_marquardt(residuals, p0, {"amplitude", "center_nm", "fwhm_nm"}, typical,
                            weights.has_value(), opt);
    fit.params[2] = std::abs(fit.params[2]);
    return fit;
}

} // namespace nfcl
