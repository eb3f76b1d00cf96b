#pragma once

// Run configuration: a JSON key tree, user lengths in nanometers.
//
//   {
//     "fiber":  {"radius_nm": 200, "n_core": 1.46, "n_clad": 1.0, "wavelength_nm": 659},
//     "beam":   {"energy_kev": 0.5 | "delta_nm": 10, "sigma_nm": 10, "y_nm": 0,
//                "delta_table": "depths.txt"},
//     "sweep":  {"s_min": 0.8, "s_max": 3.0, "points": 200} | {"diameters_nm": [...]},
//     "rule":   {"kind": "surface_inside", "delta_nm": 10, "y_nm": 0},
//     "scan":   {"points": 0},
//     "noise":  {"counts_at_max": 10000, "seed": 1},
//     "output": {"path": "out.csv", "format": "csv"}
//   }
//
// Every section and key is optional; defaults are filled in and echoed.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nfcl/beam.hpp"
#include "nfcl/errors.hpp"
#include "nfcl/fiber.hpp"
#include "nfcl/io.hpp"
#include "nfcl/pldos.hpp"

namespace nfcl {

struct SweepConfig {
    double s_min = 0.8;
    double s_max = 3.0;
    int points = 200;
    std::optional<std::vector<double>> diameters_nm;
};

struct NoiseConfig {
    std::int64_t counts_at_max = 0; // 0 disables noise
    std::uint64_t seed = 1;
};

struct RunConfig {
    FiberSpec fiber;
    BeamConfig beam;                        // delta resolved from energy when needed
    std::optional<std::string> delta_table; // path as given
    SweepConfig sweep;
    RadialRule rule;
    int scan_points = 0;                    // 0: choose from sigma and radius
    NoiseConfig noise;
    std::string output_path;
    std::string output_format = "csv";
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& section,
                                const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
        throw ConfigError((section.empty() ? "config" : section) + ": expected an object");
    }
    std::vector<std::string> unknown;
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key())) {
            unknown.push_back(section.empty() ? item.key() : section + "." + item.key());
        }
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) {
            msg += " " + k;
        }
        throw ConfigError(msg);
    }
}

inline double number_at(const nlohmann::json& obj, const char* key, const std::string& path,
                        double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError(path + "." + key + ": expected a number");
    }
    return v.get<double>();
}

inline void require(bool ok, const std::string& field, const std::string& bound, double got) {
    if (!ok) {
        throw ConfigError(field + ": must be " + bound + " (got " + format_double(got) + ")");
    }
}

inline RadialKind parse_rule_kind(const std::string& text) {
    if (text == "center") return RadialKind::center;
    if (text == "surface_inside") return RadialKind::surface_inside;
    if (text == "fixed_depth") return RadialKind::fixed_depth;
    if (text == "fixed_point") return RadialKind::fixed_point;
    throw ConfigError("rule.kind: must be one of center, surface_inside, fixed_depth, fixed_point (got '" +
                      text + "')");
}

} // namespace detail

/// Validates a parsed JSON tree and fills defaults. Relative table paths
/// resolve against `base_dir`.
inline RunConfig parse_config(const nlohmann::json& root, const std::filesystem::path& base_dir = {}) {
    using detail::number_at;
    using detail::require;
    const nlohmann::json empty = nlohmann::json::object();
    detail::reject_unknown_keys(root, "", {"fiber", "beam", "sweep", "rule", "scan", "noise", "output"});
    RunConfig cfg;

    const auto& fiber = root.contains("fiber") ? root.at("fiber") : empty;
    detail::reject_unknown_keys(fiber, "fiber", {"radius_nm", "n_core", "n_clad", "wavelength_nm"});
    cfg.fiber.radius = number_at(fiber, "radius_nm", "fiber", 200.0) * 1e-9;
    cfg.fiber.n_core = number_at(fiber, "n_core", "fiber", 1.46);
    cfg.fiber.n_clad = number_at(fiber, "n_clad", "fiber", 1.0);
    cfg.fiber.wavelength = number_at(fiber, "wavelength_nm", "fiber", 659.0) * 1e-9;
    require(cfg.fiber.radius > 0.0, "fiber.radius_nm", "> 0", cfg.fiber.radius * 1e9);
    require(cfg.fiber.wavelength > 0.0, "fiber.wavelength_nm", "> 0", cfg.fiber.wavelength * 1e9);
    require(cfg.fiber.n_clad >= 1.0, "fiber.n_clad", ">= 1", cfg.fiber.n_clad);
    require(cfg.fiber.n_core > cfg.fiber.n_clad, "fiber.n_core", "> fiber.n_clad", cfg.fiber.n_core);

    const auto& beam = root.contains("beam") ? root.at("beam") : empty;
    detail::reject_unknown_keys(beam, "beam", {"energy_kev", "delta_nm", "sigma_nm", "y_nm", "delta_table"});
    if (beam.contains("energy_kev") && beam.contains("delta_nm")) {
        throw ConfigError("beam: give exactly one of energy_kev and delta_nm, not both");
    }
    if (beam.contains("delta_table")) {
        if (!beam.at("delta_table").is_string()) {
            throw ConfigError("beam.delta_table: expected a path string");
        }
        cfg.delta_table = beam.at("delta_table").get<std::string>();
    }
    if (beam.contains("delta_nm")) {
        cfg.beam.delta = number_at(beam, "delta_nm", "beam", 0.0) * 1e-9;
        require(cfg.beam.delta >= 0.0, "beam.delta_nm", ">= 0", cfg.beam.delta * 1e9);
    } else {
        const double energy = number_at(beam, "energy_kev", "beam", 0.5);
        require(energy > 0.0, "beam.energy_kev", "> 0", energy);
        cfg.beam.energy_kev = energy;
        std::optional<PenetrationTable> table;
        if (cfg.delta_table) {
            std::filesystem::path p = *cfg.delta_table;
            if (p.is_relative() && !base_dir.empty()) {
                p = base_dir / p;
            }
            table = read_penetration_table(p);
        }
        cfg.beam.delta = penetration_depth(energy, table ? &*table : nullptr);
    }
    cfg.beam.sigma_cascade = number_at(beam, "sigma_nm", "beam", 10.0) * 1e-9;
    cfg.beam.y = number_at(beam, "y_nm", "beam", 0.0) * 1e-9;
    require(cfg.beam.sigma_cascade >= 0.0, "beam.sigma_nm", ">= 0", cfg.beam.sigma_cascade * 1e9);
    require(std::abs(cfg.beam.y) <= cfg.fiber.radius, "beam.y_nm", "within [-radius_nm, radius_nm]",
            cfg.beam.y * 1e9);

    const auto& sweep = root.contains("sweep") ? root.at("sweep") : empty;
    detail::reject_unknown_keys(sweep, "sweep", {"s_min", "s_max", "points", "diameters_nm"});
    cfg.sweep.s_min = number_at(sweep, "s_min", "sweep", 0.8);
    cfg.sweep.s_max = number_at(sweep, "s_max", "sweep", 3.0);
    const double points = number_at(sweep, "points", "sweep", 200);
    require(points >= 2 && points == std::floor(points), "sweep.points", "an integer >= 2", points);
    cfg.sweep.points = static_cast<int>(points);
    require(cfg.sweep.s_min >= min_sweep_s, "sweep.s_min", ">= 0.5", cfg.sweep.s_min);
    require(cfg.sweep.s_max <= max_sweep_s, "sweep.s_max", "<= 5", cfg.sweep.s_max);
    require(cfg.sweep.s_max > cfg.sweep.s_min, "sweep.s_max", "> sweep.s_min", cfg.sweep.s_max);
    if (sweep.contains("diameters_nm")) {
        const auto& list = sweep.at("diameters_nm");
        if (!list.is_array() || list.empty()) {
            throw ConfigError("sweep.diameters_nm: expected a non-empty array of numbers");
        }
        std::vector<double> d;
        for (const auto& v : list) {
            if (!v.is_number()) {
                throw ConfigError("sweep.diameters_nm: expected numbers");
            }
            d.push_back(v.get<double>());
            require(d.back() > 0.0 && (d.size() == 1 || d.back() > d[d.size() - 2]),
                    "sweep.diameters_nm", "positive and strictly increasing", d.back());
            const double s = cfg.fiber.wavenumber() * 0.5 * d.back() * 1e-9;
            require(s >= min_sweep_s && s <= max_sweep_s, "sweep.diameters_nm",
                    "such that s = k d / 2 lies in [0.5, 5]", d.back());
        }
        cfg.sweep.diameters_nm = std::move(d);
    }

    const auto& rule = root.contains("rule") ? root.at("rule") : empty;
    detail::reject_unknown_keys(rule, "rule", {"kind", "delta_nm", "y_nm"});
    if (rule.contains("kind")) {
        if (!rule.at("kind").is_string()) {
            throw ConfigError("rule.kind: expected a string");
        }
        cfg.rule.kind = detail::parse_rule_kind(rule.at("kind").get<std::string>());
    }
    cfg.rule.delta = number_at(rule, "delta_nm", "rule", cfg.beam.delta * 1e9) * 1e-9;
    cfg.rule.y = number_at(rule, "y_nm", "rule", cfg.beam.y * 1e9) * 1e-9;
    require(cfg.rule.delta >= 0.0, "rule.delta_nm", ">= 0", cfg.rule.delta * 1e9);

    const auto& scan = root.contains("scan") ? root.at("scan") : empty;
    detail::reject_unknown_keys(scan, "scan", {"points"});
    const double scan_points = number_at(scan, "points", "scan", 0);
    require(scan_points == 0 || (scan_points >= 5 && scan_points == std::floor(scan_points)),
            "scan.points", "0 (automatic) or an integer >= 5", scan_points);
    cfg.scan_points = static_cast<int>(scan_points);

    const auto& noise = root.contains("noise") ? root.at("noise") : empty;
    detail::reject_unknown_keys(noise, "noise", {"counts_at_max", "seed"});
    const double counts = number_at(noise, "counts_at_max", "noise", 0);
    require(counts >= 0 && counts == std::floor(counts), "noise.counts_at_max",
            "a non-negative integer", counts);
    cfg.noise.counts_at_max = static_cast<std::int64_t>(counts);
    const double seed = number_at(noise, "seed", "noise", 1);
    require(seed >= 0 && seed == std::floor(seed), "noise.seed", "a non-negative integer", seed);
    cfg.noise.seed = static_cast<std::uint64_t>(seed);

    const auto& output = root.contains("output") ? root.at("output") : empty;
    detail::reject_unknown_keys(output, "output", {"path", "format"});
    if (output.contains("path")) {
        if (!output.at("path").is_string()) {
            throw ConfigError("output.path: expected a string");
        }
        cfg.output_path = output.at("path").get<std::string>();
    }
    if (output.contains("format")) {
        cfg.output_format = output.at("format").is_string() ? output.at("format").get<std::string>() : "";
        if (cfg.output_format != "csv") {
            throw ConfigError("output.format: only 'csv' is supported");
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(root, path.parent_path());
}

namespace detail {

/// Meters to nanometers, rounded to 1e-9 nm so echoed values stay tidy.
inline double to_nm(double meters) { return std::round(meters * 1e18) / 1e9; }

} // namespace detail

/// Fully resolved configuration, defaults included.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    using detail::to_nm;
    nlohmann::json j;
    j["fiber"] = {{"radius_nm", to_nm(cfg.fiber.radius)},
                  {"n_core", cfg.fiber.n_core},
                  {"n_clad", cfg.fiber.n_clad},
                  {"wavelength_nm", to_nm(cfg.fiber.wavelength)}};
    j["beam"] = {{"delta_nm", to_nm(cfg.beam.delta)},
                 {"sigma_nm", to_nm(cfg.beam.sigma_cascade)},
                 {"y_nm", to_nm(cfg.beam.y)}};
    if (cfg.beam.energy_kev) {
        j["beam"]["energy_kev"] = *cfg.beam.energy_kev;
    }
    if (cfg.delta_table) {
        j["beam"]["delta_table"] = *cfg.delta_table;
    }
    j["sweep"] = {{"s_min", cfg.sweep.s_min}, {"s_max", cfg.sweep.s_max}, {"points", cfg.sweep.points}};
    if (cfg.sweep.diameters_nm) {
        j["sweep"]["diameters_nm"] = *cfg.sweep.diameters_nm;
    }
    j["rule"] = {{"kind", to_string(cfg.rule.kind)},
                 {"delta_nm", to_nm(cfg.rule.delta)},
                 {"y_nm", to_nm(cfg.rule.y)}};
    j["scan"] = {{"points", cfg.scan_points}};
    j["noise"] = {{"counts_at_max", cfg.noise.counts_at_max}, {"seed", cfg.noise.seed}};
    j["output"] = {{"path", cfg.output_path}, {"format", cfg.output_format}};
    return j;
}

} // namespace nfcl
