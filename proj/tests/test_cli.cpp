#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "nfcl/experiment.hpp"
#include "nfcl/io.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / ("nfcl_test_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

RunResult run(const std::string& args) {
    const fs::path err_file = scratch_dir() / "stderr.txt";
    const std::string cmd = std::string(NFCL_CLI_PATH) + " " + args + " 2> " + err_file.string();
    RunResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return r;
    }
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
        r.out.append(buf, n);
    }
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.err = ss.str();
    return r;
}

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    return kv;
}

fs::path write_config(const std::string& name, const std::string& json) {
    const fs::path p = scratch_dir() / name;
    std::ofstream(p) << json;
    return p;
}

} // namespace

TEST(Cli, ModePrintsKeyValues) {
    const auto r = run("mode");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto kv = key_values(r.out);
    ASSERT_TRUE(kv.count("n_eff"));
    EXPECT_NEAR(std::stod(kv.at("n_eff")), 1.16195673787170145, 1e-12);
    EXPECT_NEAR(std::stod(kv.at("s")), 1.90688476697407784, 1e-13);
    EXPECT_TRUE(kv.count("v_g_over_c"));
    EXPECT_TRUE(kv.count("amp_A_per_m"));
}

TEST(Cli, DiameterSweepPeak) {
    const auto out = scratch_dir() / "dsweep.csv";
    const auto r = run("diameter-sweep -o " + out.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto curve = nfcl::read_curve(out);
    EXPECT_EQ(curve.rows(), 200u);
    const auto peak = nfcl::locate_peak(curve.column("s"), curve.column("rho_bar"));
    EXPECT_GE(peak.x, 1.25);
    EXPECT_LE(peak.x, 1.55);
    bool has_config = false;
    for (const auto& c : curve.comments) {
        has_config = has_config || c.starts_with("config {");
    }
    EXPECT_TRUE(has_config);
}

TEST(Cli, PldosSweepHonoursConfig) {
    const auto cfg = write_config("deep.json", R"({"beam": {"energy_kev": 2.0}, "rule": {"kind": "fixed_depth"},
        "sweep": {"s_min": 1.0, "s_max": 2.6, "points": 33}})");
    const auto r = run("pldos-sweep -c " + cfg.string() + " --no-timestamp");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto curve = nfcl::parse_curve(r.out);
    EXPECT_EQ(curve.rows(), 33u);
    const auto peak = nfcl::locate_peak(curve.column("s"), curve.column("rho_bar"));
    EXPECT_NEAR(peak.x, 1.9, 0.15);
}

TEST(Cli, FitSpectrumReportsCenterAndWidth) {
    const auto l = nfcl::uniform_grid(600e-9, 720e-9, 61);
    const auto spectrum = nfcl::lorentzian_spectrum(l, 1.0, 659e-9, 28e-9);
    const auto data = scratch_dir() / "spectrum.csv";
    nfcl::write_curve(nfcl::to_curve(spectrum), data);
    const auto r = run("fit-spectrum -d " + data.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto kv = key_values(r.out);
    ASSERT_TRUE(kv.count("center_nm") && kv.count("fwhm_nm"));
    EXPECT_NEAR(std::stod(kv.at("center_nm")), 659.0, 1e-6);
    EXPECT_NEAR(std::stod(kv.at("fwhm_nm")), 28.0, 1e-6);
    EXPECT_EQ(kv.at("converged"), "1");
}

TEST(Cli, CrossScanThenFitScan) {
    const auto cfg = write_config("scan.json", R"({"noise": {"counts_at_max": 100000, "seed": 4}})");
    const auto data = scratch_dir() / "scan.csv";
    const auto sim = run("cross-scan -c " + cfg.string() + " -o " + data.string());
    ASSERT_EQ(sim.code, 0) << sim.err;
    const auto r = run("fit-scan -d " + data.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto kv = key_values(r.out);
    EXPECT_NEAR(std::stod(kv.at("amplitude")), 1.0, 0.05);
    EXPECT_NEAR(std::stod(kv.at("offset_nm")), 0.0, 2.0);
}

TEST(Cli, NoTimestampIsByteIdentical) {
    const auto a = run("pldos-sweep --no-timestamp");
    const auto b = run("pldos-sweep --no-timestamp");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.find("# created"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("no-such-verb").code, 1);
    EXPECT_EQ(run("fit-scan").code, 1);

    const auto bad = write_config("bad.json", R"({"fiber": {"n_core": 0.5}})");
    const auto r2 = run("mode -c " + bad.string());
    EXPECT_EQ(r2.code, 2);
    EXPECT_NE(r2.err.find("error code=2 kind=config"), std::string::npos);
    EXPECT_NE(r2.err.find("fiber.n_core"), std::string::npos);

    const auto energy = write_config("energy.json", R"({"beam": {"energy_kev": 1.0}})");
    EXPECT_EQ(run("mode -c " + energy.string()).code, 6);

    EXPECT_EQ(run("fit-spectrum -d " + (scratch_dir() / "missing.csv").string()).code, 7);

    const auto flat = scratch_dir() / "flat.csv";
    std::ofstream(flat) << "wavelength[nm],value[1]\n600,1\n610,1\n620,1\n630,1\n640,1\n650,1\n660,1\n";
    EXPECT_EQ(run("fit-spectrum -d " + flat.string()).code, 3);
}

TEST(Cli, HelpListsExitCodes) {
    const auto r = run("--help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Exit codes"), std::string::npos);
    EXPECT_NE(r.out.find("diameter-sweep"), std::string::npos);
}
