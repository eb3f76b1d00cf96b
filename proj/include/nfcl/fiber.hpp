#pragma once

// Fundamental (HE11) guided mode of a step-index cylinder with a
// homogeneous cladding: eigenvalue solution, circularly polarized mode
// function, normalization and the A*F factorization of the core intensity.
//
// Lengths are SI meters, wavenumbers rad/m. Dimensionless groups:
//   s = k a          size parameter
//   V = s sqrt(n_co^2 - n_cl^2)
//   u = h a,  w = q a,  u^2 + w^2 = V^2

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nfcl/bessel.hpp"
#include "nfcl/errors.hpp"

namespace nfcl {

inline constexpr double speed_of_light = 299792458.0; // m/s

struct FiberSpec {
    double radius = 200e-9;     // m
    double n_core = 1.46;
    double n_clad = 1.0;
    double wavelength = 659e-9; // vacuum wavelength, m

    [[nodiscard]] double wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }
    [[nodiscard]] double size_parameter() const { return wavenumber() * radius; }

    [[nodiscard]] FiberSpec with_radius(double a) const {
        FiberSpec out = *this;
        out.radius = a;
        return out;
    }

    [[nodiscard]] FiberSpec with_size_parameter(double s) const {
        return with_radius(s / wavenumber());
    }

    void validate() const {
        if (!(std::isfinite(radius) && radius > 0.0)) {
            throw DomainError("fiber radius must be positive and finite");
        }
        if (!(std::isfinite(wavelength) && wavelength > 0.0)) {
            throw DomainError("wavelength must be positive and finite");
        }
        if (!(std::isfinite(n_core) && std::isfinite(n_clad) && n_core > n_clad && n_clad >= 1.0)) {
            throw DomainError("refractive indices must satisfy n_core > n_clad >= 1");
        }
    }
};

struct ModeSolution {
    FiberSpec spec;
    double beta = 0.0;         // rad/m
    double n_eff = 0.0;
    double n_eff_excess = 0.0; // n_eff - n_clad, resolved below double spacing of n_eff
    double h = 0.0;            // core transverse wavenumber, rad/m
    double q = 0.0;            // cladding decay constant, rad/m
    double u = 0.0;
    double w = 0.0;
    double v_number = 0.0;
    double s_mode = 0.0;       // hybrid-mode parameter of the field expressions
    double one_plus_s = 0.0;   // 1 + s_mode, evaluated without cancellation
    double one_minus_s = 0.0;  // 1 - s_mode
    double amp_A = 1.0;        // 1/m
    double size_param_s = 0.0;
};

struct FieldSample {
    double r = 0.0;
    std::complex<double> e_r;
    std::complex<double> e_phi;
    std::complex<double> e_z;
    double intensity = 0.0; // 1/m^2
};

/// Radius-independent and radius-dependent parts of the core intensity,
/// |e(r)|^2 = a_factor^2 * f_factor.
struct AFFactors {
    double a_factor = 0.0; // 1/m
    double f_factor = 0.0;
};

inline double v_number(const FiberSpec& spec) {
    spec.validate();
    return spec.size_parameter() *
           std::sqrt((spec.n_core - spec.n_clad) * (spec.n_core + spec.n_clad));
}

namespace detail {

/// HE11 characteristic function in (u, w). This is the exact hybrid-mode
/// equation
///   [X + Y][n_co^2 X + n_cl^2 Y] = n_eff^2 (1/u^2 + 1/w^2)^2,
///   X = J1'(u)/(u J1(u)),  Y = K1'(w)/(w K1(w)),
/// restricted to its HE root X = X_-(w), with the 1/w^4 terms cancelled
/// analytically and the whole multiplied by w^2 u J1(u). The result has no
/// poles on 0 < u < V, and its zeros are exactly the HE_1m modes.
inline double he11_characteristic(double n_co, double n_cl, double size_param, double u,
                                  double w) {
    const double nco2 = n_co * n_co;
    const double ncl2 = n_cl * n_cl;
    const double p = bessel::k(0, w) / (w * bessel::k(1, w)); // K0/(w K1)
    const double y_scaled = -1.0 - w * w * p;                  // w^2 Y
    const double wu2 = w * w / (u * u);
    const double neff2 = ncl2 + (w / size_param) * (w / size_param);
    const double r_scaled = neff2 * (wu2 + 1.0) * (wu2 + 1.0); // w^4 R
    const double dn = nco2 - ncl2;
    const double den =
        -(nco2 + ncl2) * y_scaled + std::sqrt(dn * dn * y_scaled * y_scaled + 4.0 * nco2 * r_scaled);
    const double num = ncl2 * (2.0 * p + w * w * p * p - 2.0 / (u * u) - w * w / (u * u * u * u)) -
                       (wu2 + 1.0) * (wu2 + 1.0) / (size_param * size_param);
    return bessel::j_prime(1, u) * den - 2.0 * u * bessel::j(1, u) * num;
}

inline double u_from_w(double v, double w) { return std::sqrt((v - w) * (v + w)); }

} // namespace detail

/// Signed residual of the HE11 eigenvalue equation at a trial effective
/// index. Scale invariant: depends on (lambda, a) only through k a.
inline double dispersion_residual(const FiberSpec& spec, double n_eff_trial) {
    spec.validate();
    if (!(n_eff_trial > spec.n_clad && n_eff_trial < spec.n_core)) {
        throw DomainError("trial effective index outside (n_clad, n_core)");
    }
    const double s = spec.size_parameter();
    const double u = s * std::sqrt((spec.n_core - n_eff_trial) * (spec.n_core + n_eff_trial));
    const double w = s * std::sqrt((n_eff_trial - spec.n_clad) * (n_eff_trial + spec.n_clad));
    return detail::he11_characteristic(spec.n_core, spec.n_clad, s, u, w);
}

struct RootScanOptions {
    int grid_points = 400;
    double edge_offset = 1e-9;    // grid spans (n_cl + offset, n_co - offset)
    int tail_points = 600;        // log-spaced w-grid below the first n_eff node
    double tail_min_w = 1e-300;
};

namespace detail {

/// Locates the HE11 root in w. Returns w with the residual bracketed to
/// adjacent doubles.
inline double find_he11_w(const FiberSpec& spec, const RootScanOptions& opt) {
    const double s = spec.size_parameter();
    const double v = v_number(spec);
    const double n_co = spec.n_core;
    const double n_cl = spec.n_clad;
    auto residual_w = [&](double w) {
        return he11_characteristic(n_co, n_cl, s, u_from_w(v, w), w);
    };

    // Uniform scan in n_eff; the fundamental root is the sign change with
    // the largest n_eff, i.e. the largest w.
    const double lo = n_cl + opt.edge_offset;
    const double hi = n_co - opt.edge_offset;
    double w_prev = 0.0;
    double f_prev = 0.0;
    double w_lo = 0.0;
    double w_hi = 0.0;
    bool bracketed = false;
    for (int i = opt.grid_points - 1; i >= 0; --i) {
        const double n = lo + (hi - lo) * static_cast<double>(i) / (opt.grid_points - 1);
        const double w = s * std::sqrt((n - n_cl) * (n + n_cl));
        const double u = s * std::sqrt((n_co - n) * (n_co + n));
        const double f = he11_characteristic(n_co, n_cl, s, u, w);
        if (i < opt.grid_points - 1 && std::signbit(f) != std::signbit(f_prev)) {
            w_lo = w;
            w_hi = w_prev;
            bracketed = true;
            break;
        }
        w_prev = w;
        f_prev = f;
    }

    // Weak guidance: n_eff - n_cl may lie below the first grid node (it is
    // ~1e-26 at s = 0.3), so continue on a logarithmic grid in w.
    if (!bracketed) {
        const double w_top = w_prev;
        const double log_top = std::log(w_top);
        const double log_min = std::log(opt.tail_min_w);
        for (int i = 1; i <= opt.tail_points; ++i) {
            const double w =
                std::exp(log_top + (log_min - log_top) * static_cast<double>(i) / opt.tail_points);
            const double f = residual_w(w);
            if (std::signbit(f) != std::signbit(f_prev)) {
                w_lo = w;
                w_hi = w_prev;
                bracketed = true;
                break;
            }
            w_prev = w;
            f_prev = f;
        }
    }
    if (!bracketed) {
        std::ostringstream msg;
        msg << "no HE11 sign change found for s = " << s << ", V = " << v << " after "
            << opt.grid_points << " n_eff nodes and " << opt.tail_points << " log-w nodes";
        throw SolverError(msg.str());
    }

    double f_lo = residual_w(w_lo);
    for (int it = 0; it < 4000; ++it) {
        const double mid = 0.5 * (w_lo + w_hi);
        if (mid <= w_lo || mid >= w_hi) {
            break;
        }
        const double f_mid = residual_w(mid);
        if (f_mid == 0.0) {
            return mid;
        }
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
            w_lo = mid;
            f_lo = f_mid;
        } else {
            w_hi = mid;
        }
    }
    const double f_hi = residual_w(w_hi);
    return std::abs(f_lo) <= std::abs(f_hi) ? w_lo : w_hi;
}

/// Mode quantities for a given w, with provisional amplitude 1.
inline ModeSolution assemble_mode(const FiberSpec& spec, double w) {
    ModeSolution m;
    m.spec = spec;
    const double k = spec.wavenumber();
    const double a = spec.radius;
    const double s = spec.size_parameter();
    m.size_param_s = s;
    m.v_number = v_number(spec);
    m.w = w;
    m.u = u_from_w(m.v_number, w);
    m.h = m.u / a;
    m.q = w / a;
    const double excess2 = (w / s) * (w / s); // n_eff^2 - n_cl^2
    m.n_eff = std::sqrt(spec.n_clad * spec.n_clad + excess2);
    m.n_eff_excess = excess2 / (m.n_eff + spec.n_clad);
    m.beta = k * m.n_eff;

    const double u = m.u;
    const double jq = bessel::j(0, u) / (u * bessel::j(1, u)); // J0/(u J1)
    const double kp = bessel::k(0, w) / (w * bessel::k(1, w)); // K0/(w K1)
    const double t = 1.0 / (u * u) + 1.0 / (w * w);
    // X + Y with X = J1'/(uJ1) = jq - 1/u^2 and Y = K1'/(wK1) = -kp - 1/w^2.
    const double x_plus_y = jq - kp - t;
    m.s_mode = t / x_plus_y;
    m.one_plus_s = (jq - kp) / x_plus_y;
    m.one_minus_s = (jq - kp - 2.0 * t) / x_plus_y;
    m.amp_A = 1.0;
    return m;
}

} // namespace detail

/// Solves for the HE11 propagation constant with amplitude fixed at 1.
inline ModeSolution solve_he11_unnormalized(const FiberSpec& spec,
                                            const RootScanOptions& opt = {}) {
    spec.validate();
    return detail::assemble_mode(spec, detail::find_he11_w(spec, opt));
}

/// Circularly polarized HE11 mode function at radius r, scaled by amp_A.
/// Core factors use h r, cladding factors q r; inter-region constants make
/// e_z and e_phi continuous at r = a.
inline FieldSample field_components(const ModeSolution& mode, double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw DomainError("field radius must be finite and non-negative");
    }
    const double a = mode.spec.radius;
    const double rho = r / a;
    const double amp = mode.amp_A;
    const double ez_scale = 2.0 * mode.q / mode.beta;
    FieldSample f;
    f.r = r;
    if (r <= a) {
        const double x = mode.u * rho;
        const double c = amp * (mode.w / mode.u) * bessel::k(1, mode.w) / bessel::j(1, mode.u);
        const double j0 = bessel::j(0, x);
        const double j1 = bessel::j(1, x);
        const double j2 = bessel::j(2, x);
        f.e_r = {0.0, c * (mode.one_minus_s * j0 - mode.one_plus_s * j2)};
        f.e_phi = -c * (mode.one_minus_s * j0 + mode.one_plus_s * j2);
        f.e_z = amp * ez_scale * bessel::k(1, mode.w) / bessel::j(1, mode.u) * j1;
    } else {
        const double x = mode.w * rho;
        const double k0 = bessel::k(0, x);
        const double k1 = bessel::k(1, x);
        const double k2 = bessel::k(2, x);
        f.e_r = {0.0, amp * (mode.one_minus_s * k0 + mode.one_plus_s * k2)};
        f.e_phi = -amp * (mode.one_minus_s * k0 - mode.one_plus_s * k2);
        f.e_z = amp * ez_scale * k1;
    }
    f.intensity = std::norm(f.e_r) + std::norm(f.e_phi) + std::norm(f.e_z);
    return f;
}

/// Residual at a solved mode, evaluated at its own (u, w). Near cutoff n_eff
/// is rounded much more coarsely than w, so this is the faithful measure.
inline double dispersion_residual(const ModeSolution& mode) {
    return detail::he11_characteristic(mode.spec.n_core, mode.spec.n_clad, mode.size_param_s, mode.u,
                                       mode.w);
}

struct NormalizationOptions {
    double truncation_scale = 1.0; // multiplies the 25/q cladding cutoff
    double relative_tolerance = 1e-12;
};

/// 2 pi * integral of n(r)^2 |e(r)|^2 r dr using the mode's current amp_A.
///
/// The cladding integral stops at r_max = a + 25 s_t / q (s_t = truncation
/// scale). Since |e|^2 <= C K_2(q r)^2 there, the neglected tail is
/// O(exp(-50 s_t)) relative to the cladding contribution.
inline double normalization_integral(const ModeSolution& mode,
                                     const NormalizationOptions& opt = {}) {
    using boost::math::quadrature::gauss_kronrod;
    const double a = mode.spec.radius;
    const double nco2 = mode.spec.n_core * mode.spec.n_core;
    const double ncl2 = mode.spec.n_clad * mode.spec.n_clad;

    double err_core = 0.0;
    auto core = [&](double rho) { return field_components(mode, rho * a).intensity * rho; };
    const double core_int =
        gauss_kronrod<double, 61>::integrate(core, 0.0, 1.0, 15, opt.relative_tolerance, &err_core);

    // Cladding in x = ln(rho): the evanescent tail spans many decades of r
    // when w is small.
    auto clad = [&](double x) {
        const double rho = std::exp(x);
        return field_components(mode, rho * a).intensity * rho * rho;
    };
    const double w = mode.w;
    const double x1 = std::log1p(1.0 / w);
    const double x2 = std::log1p(25.0 * opt.truncation_scale / w);
    double err1 = 0.0;
    double err2 = 0.0;
    const double clad1 =
        gauss_kronrod<double, 61>::integrate(clad, 0.0, x1, 15, opt.relative_tolerance, &err1);
    const double clad2 =
        gauss_kronrod<double, 61>::integrate(clad, x1, x2, 15, opt.relative_tolerance, &err2);

    const double total = 2.0 * std::numbers::pi * a * a *
                         (nco2 * core_int + ncl2 * (clad1 + clad2));
    const double err = 2.0 * std::numbers::pi * a * a * (nco2 * err_core + ncl2 * (err1 + err2));
    if (!std::isfinite(total) || total <= 0.0 || err > 1e-9 * total) {
        std::ostringstream msg;
        msg << "normalization quadrature did not converge (s = " << mode.size_param_s
            << ", integral = " << total << ", error estimate = " << err << ")";
        throw NumericalError(msg.str());
    }
    return total;
}

/// Amplitude that makes the normalization integral equal to one.
inline double normalize_mode(const ModeSolution& unnormalized,
                             const NormalizationOptions& opt = {}) {
    ModeSolution unit = unnormalized;
    unit.amp_A = 1.0;
    return 1.0 / std::sqrt(normalization_integral(unit, opt));
}

/// Solves and normalizes the HE11 mode.
inline ModeSolution solve_he11(const FiberSpec& spec, const RootScanOptions& opt = {}) {
    ModeSolution mode = solve_he11_unnormalized(spec, opt);
    mode.amp_A = normalize_mode(mode);
    return mode;
}

/// Splits the core intensity into a_factor^2 (depends on k and a only) and
/// f_factor, a function of u r / a.
inline AFFactors af_decomposition(const ModeSolution& mode, double r) {
    const double a = mode.spec.radius;
    if (!(r >= 0.0) || r > a) {
        throw DomainError("A*F decomposition is defined inside the core only (0 <= r <= a)");
    }
    const double x = mode.u * r / a;
    const double j0 = bessel::j(0, x);
    const double j1 = bessel::j(1, x);
    const double j2 = bessel::j(2, x);
    const double hb = mode.h / mode.beta;
    AFFactors out;
    out.a_factor = std::numbers::sqrt2 * mode.amp_A * (mode.w / mode.u) * bessel::k(1, mode.w) /
                   bessel::j(1, mode.u);
    out.f_factor = mode.one_minus_s * mode.one_minus_s * j0 * j0 + 2.0 * hb * hb * j1 * j1 +
                   mode.one_plus_s * mode.one_plus_s * j2 * j2;
    return out;
}

} // namespace nfcl
