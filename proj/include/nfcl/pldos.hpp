#pragma once

// Guided-mode photonic local density of states, rho_g = |e(r)|^2 / v_g, its
// decay-rate form and sweeps over the size parameter.

#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "nfcl/beam.hpp"
#include "nfcl/curve.hpp"
#include "nfcl/errors.hpp"
#include "nfcl/fiber.hpp"

namespace nfcl {

inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m

struct GroupVelocityOptions {
    double relative_step = 1e-5;      // relative frequency step of the central difference
    double halving_tolerance = 1e-6;  // allowed relative change when the step is halved
};

namespace detail {

/// v_g / c from central differences of beta(omega) at fixed radius, using
/// n_eff excesses so that the weak-guidance limit keeps full precision.
inline double group_velocity_ratio(const FiberSpec& spec, double step) {
    const double s = spec.size_parameter();
    const ModeSolution up = solve_he11_unnormalized(spec.with_size_parameter(s * (1.0 + step)));
    const ModeSolution dn = solve_he11_unnormalized(spec.with_size_parameter(s * (1.0 - step)));
    // beta/k0 at k0(1 +- step), with k0 the unperturbed vacuum wavenumber.
    const double dbeta = 2.0 * step * spec.n_clad + (1.0 + step) * up.n_eff_excess -
                         (1.0 - step) * dn.n_eff_excess;
    return 2.0 * step / dbeta;
}

} // namespace detail

/// Group velocity d(omega)/d(beta) of the HE11 mode at fixed radius and
/// non-dispersive indices, in m/s. The step-halved estimate must agree to
/// the configured tolerance.
inline double group_velocity(const FiberSpec& spec, const GroupVelocityOptions& opt = {}) {
    spec.validate();
    const double coarse = detail::group_velocity_ratio(spec, opt.relative_step);
    const double fine = detail::group_velocity_ratio(spec, 0.5 * opt.relative_step);
    if (!(std::abs(coarse - fine) <= opt.halving_tolerance * std::abs(fine))) {
        std::ostringstream msg;
        msg << "group velocity not converged at s = " << spec.size_parameter()
            << " (v_g/c = " << coarse << " vs " << fine << " at half step)";
        throw NumericalError(msg.str());
    }
    if (!(coarse > 0.0 && coarse <= 1.0 + 1e-9)) {
        std::ostringstream msg;
        msg << "unphysical group velocity v_g/c = " << coarse << " at s = " << spec.size_parameter();
        throw NumericalError(msg.str());
    }
    return coarse * speed_of_light;
}

struct PldosPoint {
    double size_param_s = 0.0;
    double r_eval = 0.0;     // m
    double rho_g = 0.0;      // s/m^3
    double rho_bar = 1.0;    // normalized over a sweep; a lone point is its own maximum
    double n_eff = 0.0;
    double v_g_over_c = 0.0;
    double wavelength = 0.0; // m, sets the transition frequency for decay rates
};

/// PLDOS at radius r for an already solved mode and group velocity.
inline PldosPoint pldos_at(const ModeSolution& mode, double v_g, double r_eval) {
    if (!(r_eval >= 0.0) || r_eval > mode.spec.radius) {
        throw DomainError("PLDOS evaluation point must lie inside the core (0 <= r <= a)");
    }
    PldosPoint p;
    p.size_param_s = mode.size_param_s;
    p.r_eval = r_eval;
    p.rho_g = field_components(mode, r_eval).intensity / v_g;
    p.n_eff = mode.n_eff;
    p.v_g_over_c = v_g / speed_of_light;
    p.wavelength = mode.spec.wavelength;
    return p;
}

inline PldosPoint pldos_at(const FiberSpec& spec, double r_eval) {
    spec.validate();
    if (!(r_eval >= 0.0) || r_eval > spec.radius) {
        throw DomainError("PLDOS evaluation point must lie inside the core (0 <= r <= a)");
    }
    return pldos_at(solve_he11(spec), group_velocity(spec), r_eval);
}

/// Polarization-averaged decay rate into the fundamental modes,
/// gamma = pi omega0 p^2 rho_g / (3 hbar eps0), in 1/s.
inline double decay_rate(double p_dipole, const PldosPoint& point) {
    if (!(p_dipole > 0.0)) {
        throw DomainError("dipole moment must be positive");
    }
    const double omega0 = 2.0 * std::numbers::pi * speed_of_light / point.wavelength;
    return std::numbers::pi * omega0 * p_dipole * p_dipole * point.rho_g /
           (3.0 * hbar * vacuum_permittivity);
}

enum class RadialKind { center, surface_inside, fixed_depth, fixed_point };

/// How the evaluation radius follows the fiber radius during a sweep.
struct RadialRule {
    RadialKind kind = RadialKind::surface_inside;
    double delta = 0.0; // m, fixed_depth and fixed_point
    double y = 0.0;     // m, fixed_point

    static constexpr double surface_offset = 1e-6; // r = a (1 - offset) for surface_inside

    static RadialRule center() { return {RadialKind::center, 0.0, 0.0}; }
    static RadialRule surface_inside() { return {RadialKind::surface_inside, 0.0, 0.0}; }
    static RadialRule fixed_depth(double delta) { return {RadialKind::fixed_depth, delta, 0.0}; }
    static RadialRule fixed_point(double delta, double y) {
        return {RadialKind::fixed_point, delta, y};
    }
};

inline const char* to_string(RadialKind kind) {
    switch (kind) {
    case RadialKind::center: return "center";
    case RadialKind::surface_inside: return "surface_inside";
    case RadialKind::fixed_depth: return "fixed_depth";
    case RadialKind::fixed_point: return "fixed_point";
    }
    return "unknown";
}

/// Evaluation radius for fiber radius a, or nullopt when the beam stopping
/// point of a fixed_depth/fixed_point rule falls outside the core.
inline std::optional<double> resolve_radius(const RadialRule& rule, double a) {
    switch (rule.kind) {
    case RadialKind::center: return 0.0;
    case RadialKind::surface_inside: return a * (1.0 - RadialRule::surface_offset);
    case RadialKind::fixed_depth:
    case RadialKind::fixed_point: {
        const double y = rule.kind == RadialKind::fixed_point ? rule.y : 0.0;
        const auto stop = stopping_point(a, y, rule.delta);
        if (!stop || !stop->inside) {
            return std::nullopt;
        }
        return stop->r;
    }
    }
    return std::nullopt;
}

inline std::vector<ColumnSpec> pldos_sweep_schema() {
    return {{"s", "1"}, {"rho_g", "s/m^3"}, {"rho_bar", "1"}, {"n_eff", "1"}, {"v_g_over_c", "1"}};
}

inline constexpr double min_sweep_s = 0.5;
inline constexpr double max_sweep_s = 5.0;

/// PLDOS over a grid of size parameters at fixed wavelength and indices
/// (the radius of `base` is ignored). Grid points where a beam rule puts
/// the stopping point outside the core contribute zero.
inline Curve pldos_sweep(const FiberSpec& base, std::span<const double> s_grid,
                         const RadialRule& rule) {
    if (s_grid.empty()) {
        throw DomainError("size-parameter grid is empty");
    }
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        if (!(s_grid[i] >= min_sweep_s && s_grid[i] <= max_sweep_s)) {
            throw DomainError("size parameter outside [0.5, 5]: " + std::to_string(s_grid[i]));
        }
        if (i > 0 && !(s_grid[i] > s_grid[i - 1])) {
            throw DomainError("size-parameter grid must be strictly increasing");
        }
    }
    std::vector<double> rho(s_grid.size());
    std::vector<double> neff(s_grid.size());
    std::vector<double> vg(s_grid.size());
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        const FiberSpec spec = base.with_size_parameter(s_grid[i]);
        try {
            const ModeSolution mode = solve_he11(spec);
            const double v_g = group_velocity(spec);
            neff[i] = mode.n_eff;
            vg[i] = v_g / speed_of_light;
            const auto r = resolve_radius(rule, spec.radius);
            rho[i] = r ? pldos_at(mode, v_g, *r).rho_g : 0.0;
        } catch (const SolverError& e) {
            throw SolverError("sweep failed at s = " + std::to_string(s_grid[i]) + ": " + e.what());
        } catch (const NumericalError& e) {
            throw NumericalError("sweep failed at s = " + std::to_string(s_grid[i]) + ": " +
                                 e.what());
        }
    }
    Curve out(pldos_sweep_schema());
    out.set("s", {s_grid.begin(), s_grid.end()});
    out.set("rho_bar", normalize_to_unit_max(rho));
    out.set("rho_g", std::move(rho));
    out.set("n_eff", std::move(neff));
    out.set("v_g_over_c", std::move(vg));
    return out;
}

/// Uniform grid of n points on [lo, hi].
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    if (n < 2) {
        return {lo};
    }
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
}

/// Default sweep grid: 200 points on [0.8, 3.0].
inline std::vector<double> default_s_grid() { return uniform_grid(0.8, 3.0, 200); }

} // namespace nfcl
