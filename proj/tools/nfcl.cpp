// nfcl: command-line front end for the nanofiber PLDOS toolkit.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "nfcl/nfcl.hpp"

namespace {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_config = 2,
    exit_domain = 3,
    exit_solver = 4,
    exit_numerical = 5,
    exit_unsupported_energy = 6,
    exit_io = 7,
    exit_internal = 8,
};

constexpr const char* exit_code_table =
    "Exit codes:\n"
    "  0  success\n"
    "  1  usage error (bad arguments)\n"
    "  2  configuration error (unknown key, violated bound)\n"
    "  3  domain error (input outside an operation's domain)\n"
    "  4  mode solver error (HE11 root not bracketed)\n"
    "  5  numerical error (quadrature or differentiation check failed)\n"
    "  6  unsupported beam energy (not in built-in or user depth table)\n"
    "  7  I/O error\n"
    "  8  internal error\n"
    "Errors are reported as one line on stderr: error code=<n> kind=<kind>: <message>\n";

struct Invocation {
    std::string verb;
    std::string config_path;
    std::string data_path;
    std::string output_path;
    bool no_timestamp = false;
};

std::string single_line(std::string text) {
    for (char& c : text) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return text;
}

int report(int code, const char* kind, const std::string& message) {
    std::cerr << "error code=" << code << " kind=" << kind << ": " << single_line(message) << '\n';
    return code;
}

std::vector<std::string> provenance(const Invocation& inv, const nfcl::RunConfig& cfg) {
    std::vector<std::string> lines;
    lines.push_back("verb " + inv.verb);
    lines.push_back("config " + nfcl::config_to_json(cfg).dump());
    return lines;
}

std::string output_path(const Invocation& inv, const nfcl::RunConfig& cfg) {
    return inv.output_path.empty() ? cfg.output_path : inv.output_path;
}

/// Writes `text` to the output path, or to stdout when none is configured.
void emit_text(const Invocation& inv, const nfcl::RunConfig& cfg, const std::string& text) {
    const std::string path = output_path(inv, cfg);
    if (path.empty()) {
        std::cout << text;
    } else {
        nfcl::write_file_atomic(path, text);
    }
}

void emit_curve(const Invocation& inv, const nfcl::RunConfig& cfg, nfcl::Curve curve) {
    auto prov = provenance(inv, cfg);
    curve.comments.insert(curve.comments.begin(), prov.begin(), prov.end());
    emit_text(inv, cfg, nfcl::format_curve(curve, {.timestamp = !inv.no_timestamp}));
}

std::string header_text(const Invocation& inv, const nfcl::RunConfig& cfg) {
    std::string out = "# nfcl " + std::string(nfcl::version) + "\n";
    if (!inv.no_timestamp) {
        out += "# created " + nfcl::utc_timestamp() + "\n";
    }
    for (const auto& line : provenance(inv, cfg)) {
        out += "# " + line + "\n";
    }
    return out;
}

std::vector<double> s_grid(const nfcl::RunConfig& cfg) {
    return nfcl::uniform_grid(cfg.sweep.s_min, cfg.sweep.s_max,
                              static_cast<std::size_t>(cfg.sweep.points));
}

int run_mode(const Invocation& inv, const nfcl::RunConfig& cfg) {
    const nfcl::ModeSolution m = nfcl::solve_he11(cfg.fiber);
    const double vg = nfcl::group_velocity(cfg.fiber);
    std::ostringstream out;
    auto kv = [&](const char* key, double v) { out << key << '=' << nfcl::format_double(v) << '\n'; };
    kv("s", m.size_param_s);
    kv("V", m.v_number);
    kv("n_eff", m.n_eff);
    kv("u", m.u);
    kv("w", m.w);
    kv("s_mode", m.s_mode);
    kv("beta_per_m", m.beta);
    kv("v_g_over_c", vg / nfcl::speed_of_light);
    kv("amp_A_per_m", m.amp_A);
    const std::string path = output_path(inv, cfg);
    std::cout << out.str();
    if (!path.empty()) {
        nfcl::write_file_atomic(path, header_text(inv, cfg) + out.str());
    }
    return exit_ok;
}

int run_pldos_sweep(const Invocation& inv, const nfcl::RunConfig& cfg) {
    const auto grid = s_grid(cfg);
    nfcl::Curve curve = nfcl::pldos_sweep(cfg.fiber, grid, cfg.rule);
    const nfcl::Peak peak = nfcl::locate_peak(curve.column("s"), curve.column("rho_bar"));
    curve.comments.push_back("rule " + std::string(nfcl::to_string(cfg.rule.kind)));
    curve.comments.push_back("peak_s " + nfcl::format_double(peak.x));
    emit_curve(inv, cfg, std::move(curve));
    return exit_ok;
}

nfcl::ScanCurve maybe_noisy(nfcl::ScanCurve scan, const nfcl::RunConfig& cfg) {
    if (cfg.noise.counts_at_max > 0) {
        return nfcl::add_shot_noise(scan, cfg.noise.counts_at_max, cfg.noise.seed);
    }
    return scan;
}

int run_cross_scan(const Invocation& inv, const nfcl::RunConfig& cfg) {
    std::vector<double> grid;
    const double a = cfg.fiber.radius;
    const double sigma = cfg.beam.sigma_cascade;
    if (cfg.scan_points > 0) {
        const double half = a + 5.0 * sigma;
        grid = nfcl::uniform_grid(-half, half, static_cast<std::size_t>(cfg.scan_points));
    } else {
        const double spacing = sigma > 0.0 ? std::min(5e-9, 0.5 * sigma) : 5e-9;
        grid = nfcl::cross_scan_grid(a, sigma, spacing);
    }
    const auto scan = maybe_noisy(nfcl::simulate_cross_scan(cfg.fiber, cfg.beam, grid), cfg);
    emit_curve(inv, cfg, nfcl::to_curve(scan));
    return exit_ok;
}

int run_diameter_sweep(const Invocation& inv, const nfcl::RunConfig& cfg) {
    std::vector<double> diameters;
    if (cfg.sweep.diameters_nm) {
        for (double d : *cfg.sweep.diameters_nm) {
            diameters.push_back(d * 1e-9);
        }
    } else {
        for (double s : s_grid(cfg)) {
            diameters.push_back(2.0 * s / cfg.fiber.wavenumber());
        }
    }
    const auto raw = nfcl::simulate_diameter_sweep(diameters, cfg.beam, cfg.fiber, false);
    nfcl::Curve curve({{"s", "1"}, {"diameter", "nm"}, {"rho_g", "s/m^3"}, {"rho_bar", "1"}});
    std::vector<double> d_nm;
    for (double d : diameters) {
        d_nm.push_back(d * 1e9);
    }
    curve.set("s", raw.x);
    curve.set("diameter", std::move(d_nm));
    curve.set("rho_g", raw.value);
    curve.set("rho_bar", nfcl::normalize_to_unit_max(raw.value));
    const nfcl::Peak peak = nfcl::locate_peak(curve.column("s"), curve.column("rho_bar"));
    curve.comments.push_back("peak_s " + nfcl::format_double(peak.x));
    emit_curve(inv, cfg, std::move(curve));
    return exit_ok;
}

std::string format_fit(const nfcl::FitResult& fit) {
    std::ostringstream out;
    out << "converged=" << (fit.converged ? 1 : 0) << '\n';
    out << "iterations=" << fit.iterations << '\n';
    out << "residual_norm=" << nfcl::format_double(fit.residual_norm) << '\n';
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        out << fit.names[i] << '=' << nfcl::format_double(fit.params[i]) << '\n';
        if (auto se = fit.standard_error(fit.names[i])) {
            out << fit.names[i] << "_stderr=" << nfcl::format_double(*se) << '\n';
        }
    }
    return out.str();
}

nfcl::ScanCurve load_data(const Invocation& inv) {
    if (inv.data_path.empty()) {
        throw nfcl::IoError(inv.verb + " needs --data <file>");
    }
    return nfcl::scan_from_curve(nfcl::read_curve(inv.data_path));
}

int run_fit_scan(const Invocation& inv, const nfcl::RunConfig& cfg) {
    const nfcl::ScanCurve data = load_data(inv);
    if (data.axis != nfcl::ScanAxis::y_position) {
        throw nfcl::DomainError("fit-scan needs a y-position scan");
    }
    // The fiber diameter comes from the data's provenance when recorded.
    const nfcl::FiberSpec fiber = data.meta.fiber.value_or(cfg.fiber);
    const nfcl::BeamConfig beam = data.meta.beam.value_or(cfg.beam);
    const nfcl::FitResult fit = nfcl::fit_scan(data, nfcl::scan_model(fiber, beam));
    emit_text(inv, cfg, header_text(inv, cfg) + format_fit(fit));
    return exit_ok;
}

int run_fit_spectrum(const Invocation& inv, const nfcl::RunConfig& cfg) {
    const nfcl::ScanCurve data = load_data(inv);
    if (data.axis != nfcl::ScanAxis::wavelength) {
        throw nfcl::DomainError("fit-spectrum needs a wavelength spectrum");
    }
    const nfcl::FitResult fit = nfcl::fit_lorentzian(data);
    emit_text(inv, cfg, header_text(inv, cfg) + format_fit(fit));
    return exit_ok;
}

int dispatch(const Invocation& inv) {
    const nfcl::RunConfig cfg =
        inv.config_path.empty() ? nfcl::parse_config(nlohmann::json::object())
                                : nfcl::load_config(inv.config_path);
    if (inv.verb == "mode") return run_mode(inv, cfg);
    if (inv.verb == "pldos-sweep") return run_pldos_sweep(inv, cfg);
    if (inv.verb == "cross-scan") return run_cross_scan(inv, cfg);
    if (inv.verb == "diameter-sweep") return run_diameter_sweep(inv, cfg);
    if (inv.verb == "fit-scan") return run_fit_scan(inv, cfg);
    if (inv.verb == "fit-spectrum") return run_fit_spectrum(inv, cfg);
    return report(exit_usage, "usage", "unknown verb '" + inv.verb + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guided-mode PLDOS of vacuum-clad nanofibers and cathodoluminescence scan models"};
    app.footer(exit_code_table);
    app.require_subcommand(1, 1);

    Invocation inv;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", inv.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("-o,--output", inv.output_path, "output file (overrides output.path)");
        sub->add_flag("--no-timestamp", inv.no_timestamp, "omit the creation-time header line");
    };
    struct VerbInfo {
        const char* name;
        const char* help;
        bool needs_data;
    };
    const VerbInfo verbs[] = {
        {"mode", "solve the HE11 mode; print n_eff, V, u, w, s as key=value lines", false},
        {"pldos-sweep", "PLDOS versus size parameter for a radial rule (CSV)", false},
        {"cross-scan", "simulated spot scan across the fiber cross-section (CSV)", false},
        {"diameter-sweep", "normalized PLDOS at the beam stopping point versus diameter (CSV)", false},
        {"fit-scan", "fit amplitude and center offset of the scan model to --data", true},
        {"fit-spectrum", "fit a Lorentzian to the spectrum in --data", true},
    };
    for (const auto& v : verbs) {
        CLI::App* sub = app.add_subcommand(v.name, v.help);
        add_common(sub);
        if (v.needs_data) {
            sub->add_option("-d,--data", inv.data_path, "input CSV curve")->required();
        }
        sub->callback([&inv, name = std::string(v.name)] { inv.verb = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report(exit_usage, "usage", e.what());
    }

    try {
        return dispatch(inv);
    } catch (const nfcl::ConfigError& e) {
        return report(exit_config, "config", e.what());
    } catch (const nfcl::UnsupportedEnergy& e) {
        return report(exit_unsupported_energy, "unsupported_energy", e.what());
    } catch (const nfcl::DomainError& e) {
        return report(exit_domain, "domain", e.what());
    } catch (const nfcl::SolverError& e) {
        return report(exit_solver, "solver", e.what());
    } catch (const nfcl::NumericalError& e) {
        return report(exit_numerical, "numerical", e.what());
    } catch (const nfcl::IoError& e) {
        return report(exit_io, "io", e.what());
    } catch (const std::exception& e) {
        return report(exit_internal, "internal", e.what());
    }
}
