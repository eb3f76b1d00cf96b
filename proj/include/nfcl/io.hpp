#pragma once

// CSV curve files.
//
//   # nfcl 1.0.0
//   # created 2026-01-01T00:00:00Z        (optional)
//   # <provenance lines>
//   s[1],rho_g[s/m^3],rho_bar[1]
//   0.80000000000000004,1.2345e+13,0.25
//
// '.' decimal separator, 17 significant digits, LF line endings. The first
// non-comment line is the header; each column is name[unit].

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "nfcl/beam.hpp"
#include "nfcl/curve.hpp"
#include "nfcl/errors.hpp"
#include "nfcl/experiment.hpp"

namespace nfcl {

inline constexpr std::string_view version = "1.0.0";

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

inline double parse_double(std::string_view text, std::string_view context) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw IoError(std::string(context) + ": cannot parse number '" + std::string(text) + "'");
    }
    return v;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Writes `content` to `path` through a temporary file in the same
/// directory followed by a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw IoError("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CurveWriteOptions {
    bool timestamp = true;
};

inline std::string format_curve(const Curve& curve, const CurveWriteOptions& opt = {}) {
    std::string out;
    out += "# nfcl ";
    out += version;
    out += '\n';
    if (opt.timestamp) {
        out += "# created " + utc_timestamp() + '\n';
    }
    for (const auto& c : curve.comments) {
        out += "# " + c + '\n';
    }
    const auto& schema = curve.schema();
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (j > 0) {
            out += ',';
        }
        out += schema[j].name + '[' + schema[j].unit + ']';
    }
    out += '\n';
    const std::size_t rows = curve.rows();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < schema.size(); ++j) {
            if (j > 0) {
                out += ',';
            }
            const auto& col = curve.column(j);
            if (i >= col.size()) {
                throw DomainError("column '" + schema[j].name + "' is shorter than the curve");
            }
            out += format_double(col[i]);
        }
        out += '\n';
    }
    return out;
}

inline void write_curve(const Curve& curve, const std::filesystem::path& path,
                        const CurveWriteOptions& opt = {}) {
    write_file_atomic(path, format_curve(curve, opt));
}

inline Curve parse_curve(std::string_view text, std::string_view context = "curve") {
    std::vector<std::string> comments;
    std::vector<ColumnSpec> schema;
    std::vector<std::vector<double>> columns;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        const std::string where = std::string(context) + ":" + std::to_string(line_no);
        if (line.front() == '#') {
            line.remove_prefix(1);
            if (!line.empty() && line.front() == ' ') {
                line.remove_prefix(1);
            }
            if (line.starts_with("nfcl ") || line.starts_with("created ")) {
                continue;
            }
            comments.emplace_back(line);
            continue;
        }
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                 : comma - start));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (!have_header) {
            for (auto f : fields) {
                const std::size_t open = f.find('[');
                if (open == std::string_view::npos || f.back() != ']') {
                    throw IoError(where + ": header field '" + std::string(f) +
                                  "' is not of the form name[unit]");
                }
                schema.push_back({std::string(f.substr(0, open)),
                                  std::string(f.substr(open + 1, f.size() - open - 2))});
            }
            columns.resize(schema.size());
            have_header = true;
            continue;
        }
        if (fields.size() != schema.size()) {
            throw IoError(where + ": expected " + std::to_string(schema.size()) + " fields, got " +
                          std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < fields.size(); ++j) {
            columns[j].push_back(parse_double(fields[j], where));
        }
    }
    if (!have_header) {
        throw IoError(std::string(context) + ": no column header line");
    }
    Curve curve(schema);
    for (std::size_t j = 0; j < schema.size(); ++j) {
        curve.set(schema[j].name, std::move(columns[j]));
    }
    curve.comments = std::move(comments);
    return curve;
}

inline Curve read_curve(const std::filesystem::path& path) {
    return parse_curve(read_file(path), path.string());
}

// ScanCurve <-> Curve. Lengths are written in nm; provenance goes into
// "meta key=value" comment lines.

inline Curve to_curve(const ScanCurve& scan) {
    const bool length_axis = scan.axis != ScanAxis::size_param_s;
    std::vector<ColumnSpec> schema{{to_string(scan.axis), length_axis ? "nm" : "1"},
                                   {"value", "1"}};
    if (scan.uncertainty) {
        schema.push_back({"uncertainty", "1"});
    }
    Curve c(schema);
    std::vector<double> x = scan.x;
    if (length_axis) {
        for (double& v : x) {
            v *= 1e9;
        }
    }
    c.set(schema[0].name, std::move(x));
    if (scan.uncertainty) {
        c.set("uncertainty", *scan.uncertainty);
    }
    c.set("value", scan.value);
    auto meta = [&](const std::string& key, double v) {
        c.comments.push_back("meta " + key + "=" + format_double(v));
    };
    if (scan.meta.fiber) {
        meta("fiber.radius_nm", scan.meta.fiber->radius * 1e9);
        meta("fiber.n_core", scan.meta.fiber->n_core);
        meta("fiber.n_clad", scan.meta.fiber->n_clad);
        meta("fiber.wavelength_nm", scan.meta.fiber->wavelength * 1e9);
    }
    if (scan.meta.beam) {
        if (scan.meta.beam->energy_kev) {
            meta("beam.energy_kev", *scan.meta.beam->energy_kev);
        }
        meta("beam.delta_nm", scan.meta.beam->delta * 1e9);
        meta("beam.sigma_nm", scan.meta.beam->sigma_cascade * 1e9);
        meta("beam.y_nm", scan.meta.beam->y * 1e9);
    }
    return c;
}

inline ScanCurve scan_from_curve(const Curve& curve) {
    if (curve.column_count() < 2) {
        throw IoError("scan file needs an abscissa and a value column");
    }
    const ColumnSpec& xs = curve.schema().front();
    ScanCurve scan;
    double x_scale = 1.0;
    if (xs.name == "y" || xs.name == "wavelength") {
        scan.axis = xs.name == "y" ? ScanAxis::y_position : ScanAxis::wavelength;
        if (xs.unit == "nm") {
            x_scale = 1e-9;
        } else if (xs.unit != "m") {
            throw IoError("unsupported length unit '" + xs.unit + "' for column " + xs.name);
        }
    } else if (xs.name == "s") {
        scan.axis = ScanAxis::size_param_s;
    } else {
        throw IoError("unknown scan abscissa column '" + xs.name + "'");
    }
    scan.x = curve.column(0);
    for (double& v : scan.x) {
        v *= x_scale;
    }
    scan.value = curve.column("value");
    if (curve.index_of("uncertainty")) {
        scan.uncertainty = curve.column("uncertainty");
    }

    FiberSpec fiber;
    BeamConfig beam;
    bool have_fiber = false;
    bool have_beam = false;
    for (const auto& line : curve.comments) {
        if (!line.starts_with("meta ")) {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        const std::string key = line.substr(5, eq - 5);
        const double v = parse_double(std::string_view(line).substr(eq + 1), key);
        if (key == "fiber.radius_nm") { fiber.radius = v * 1e-9; have_fiber = true; }
        else if (key == "fiber.n_core") { fiber.n_core = v; }
        else if (key == "fiber.n_clad") { fiber.n_clad = v; }
        else if (key == "fiber.wavelength_nm") { fiber.wavelength = v * 1e-9; }
        else if (key == "beam.energy_kev") { beam.energy_kev = v; have_beam = true; }
        else if (key == "beam.delta_nm") { beam.delta = v * 1e-9; have_beam = true; }
        else if (key == "beam.sigma_nm") { beam.sigma_cascade = v * 1e-9; have_beam = true; }
        else if (key == "beam.y_nm") { beam.y = v * 1e-9; have_beam = true; }
    }
    if (have_fiber) {
        scan.meta.fiber = fiber;
    }
    if (have_beam) {
        scan.meta.beam = beam;
    }
    scan.validate();
    return scan;
}

/// Two whitespace-separated columns per line: energy (keV), depth (nm).
/// '#' starts a comment.
inline PenetrationTable parse_penetration_table(std::string_view text,
                                                std::string_view context = "table") {
    PenetrationTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::string e_text, d_text, extra;
        if (!(fields >> e_text)) {
            continue;
        }
        const std::string where = std::string(context) + ":" + std::to_string(line_no);
        if (!(fields >> d_text) || (fields >> extra)) {
            throw IoError(where + ": expected two columns (keV nm)");
        }
        const double e = parse_double(e_text, where);
        const double d = parse_double(d_text, where);
        if (!(e > 0.0) || !(d >= 0.0)) {
            throw IoError(where + ": energy must be > 0 and depth >= 0");
        }
        table.rows.emplace_back(e, d * 1e-9);
    }
    return table;
}

inline PenetrationTable read_penetration_table(const std::filesystem::path& path) {
    return parse_penetration_table(read_file(path), path.string());
}

} // namespace nfcl
