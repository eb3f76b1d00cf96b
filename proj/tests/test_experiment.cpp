#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nfcl/experiment.hpp"

namespace {

using nfcl::BeamConfig;
using nfcl::FiberSpec;
using nfcl::ScanCurve;

constexpr double nm = 1e-9;

BeamConfig beam(double delta, double sigma = 10 * nm) {
    BeamConfig b;
    b.energy_kev.reset();
    b.delta = delta;
    b.sigma_cascade = sigma;
    return b;
}

std::vector<double> diameters_for_s(double lo, double hi, std::size_t n, double wavelength) {
    std::vector<double> d;
    for (double s : nfcl::uniform_grid(lo, hi, n)) {
        d.push_back(s * wavelength / std::numbers::pi);
    }
    return d;
}

ScanCurve shifted_data(const ScanCurve& model, double amplitude, double offset, double spacing) {
    ScanCurve data;
    data.axis = nfcl::ScanAxis::y_position;
    for (double y = -300 * nm; y <= 300 * nm + 1e-15; y += spacing) {
        data.x.push_back(y);
        data.value.push_back(nfcl::evaluate_scan_model(model, y, amplitude, offset));
    }
    data.meta = model.meta;
    return data;
}

const ScanCurve& reference_model() {
    static const ScanCurve model = nfcl::scan_model(FiberSpec{}, beam(10 * nm));
    return model;
}

} // namespace

TEST(CrossScan, MirrorSymmetric) {
    const FiberSpec f{};
    const auto y = nfcl::cross_scan_grid(f.radius, 10 * nm, 2 * nm);
    for (double delta : {10 * nm, 175 * nm}) {
        const auto c = nfcl::simulate_cross_scan(f, beam(delta), y);
        for (std::size_t i = 0; i < c.size(); ++i) {
            EXPECT_NEAR(c.value[i], c.value[c.size() - 1 - i], 1e-9);
        }
        EXPECT_NEAR(*std::max_element(c.value.begin(), c.value.end()), 1.0, 1e-15);
    }
}

TEST(CrossScan, ShallowBeamIsFlatInCenter) {
    const FiberSpec f{};
    const auto y = nfcl::cross_scan_grid(f.radius, 10 * nm, 2 * nm);
    const auto c = nfcl::simulate_cross_scan(f, beam(10 * nm), y);
    double lo = INFINITY;
    double hi = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (std::abs(c.x[i]) <= 0.6 * f.radius) {
            lo = std::min(lo, c.value[i]);
            hi = std::max(hi, c.value[i]);
        }
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi / lo, 1.5);
}

TEST(CrossScan, SurfaceLimitIsConstant) {
    const FiberSpec f{};
    const auto y = nfcl::uniform_grid(-f.radius, f.radius, 81);
    const auto c = nfcl::simulate_cross_scan(f, beam(0.0, 0.0), y);
    for (double v : c.value) {
        EXPECT_NEAR(v, 1.0, 1e-9);
    }
}

TEST(CrossScan, ZeroSigmaEqualsPointwisePldos) {
    const FiberSpec f{};
    const auto y = nfcl::uniform_grid(-f.radius, f.radius, 41);
    const auto c = nfcl::simulate_cross_scan(f, beam(175 * nm, 0.0), y, false);
    const auto mode = nfcl::solve_he11(f);
    const double v_g = nfcl::group_velocity(f);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto stop = nfcl::stopping_point(f.radius, y[i], 175 * nm);
        const double expected = stop && stop->inside ? nfcl::pldos_at(mode, v_g, stop->r).rho_g : 0.0;
        EXPECT_EQ(c.value[i], expected);
    }
}

TEST(CrossScan, Deterministic) {
    const FiberSpec f{};
    const auto y = nfcl::cross_scan_grid(f.radius, 10 * nm, 5 * nm);
    EXPECT_EQ(nfcl::simulate_cross_scan(f, beam(10 * nm), y).value,
              nfcl::simulate_cross_scan(f, beam(10 * nm), y).value);
}

TEST(CrossScan, RejectsGridNotCoveringFiber) {
    const FiberSpec f{};
    const auto y = nfcl::uniform_grid(-100 * nm, 100 * nm, 41);
    EXPECT_THROW(nfcl::simulate_cross_scan(f, beam(10 * nm), y), nfcl::DomainError);
}

TEST(DiameterSweep, PeakPositions) {
    const FiberSpec f{};
    const auto d = diameters_for_s(0.8, 3.0, 200, f.wavelength);
    const auto shallow = nfcl::simulate_diameter_sweep(d, beam(10 * nm), f);
    const auto deep = nfcl::simulate_diameter_sweep(d, beam(175 * nm), f);
    const auto p10 = nfcl::locate_peak(shallow.x, shallow.value);
    const auto p175 = nfcl::locate_peak(deep.x, deep.value);
    EXPECT_NEAR(p10.x, 1.4, 0.15);
    EXPECT_NEAR(p175.x, 1.9, 0.15);
    EXPECT_LT(p10.x, p175.x);
}

TEST(DiameterSweep, FourHundredNanometerFiberBrightest) {
    const std::vector<double> d{200 * nm, 400 * nm, 600 * nm, 800 * nm, 1000 * nm};
    const auto raw = nfcl::simulate_diameter_sweep(d, beam(10 * nm), FiberSpec{}, false);
    const auto best = std::max_element(raw.value.begin(), raw.value.end()) - raw.value.begin();
    EXPECT_EQ(best, 1);
    EXPECT_NEAR(raw.x[1], 2.0 * std::numbers::pi * 200.0 / 659.0, 1e-12);
}

TEST(DiameterSweep, RejectsUnorderedDiameters) {
    const std::vector<double> d{400 * nm, 300 * nm};
    EXPECT_THROW(nfcl::simulate_diameter_sweep(d, beam(10 * nm), FiberSpec{}), nfcl::DomainError);
}

TEST(ShotNoise, DeterministicPerSeed) {
    const auto& m = reference_model();
    EXPECT_EQ(nfcl::add_shot_noise(m, 1000, 7).value, nfcl::add_shot_noise(m, 1000, 7).value);
    EXPECT_NE(nfcl::add_shot_noise(m, 1000, 7).value, nfcl::add_shot_noise(m, 1000, 8).value);
}

TEST(ShotNoise, LargeCountsReproduceInput) {
    const auto& m = reference_model();
    const auto peak = std::max_element(m.value.begin(), m.value.end()) - m.value.begin();
    const auto noisy = nfcl::add_shot_noise(m, 100000000, 3);
    EXPECT_LT(std::abs(noisy.value[peak] - m.value[peak]) / m.value[peak], 1e-3);
}

TEST(ShotNoise, VarianceMatchesPoisson) {
    ScanCurve c;
    c.x = {0.0, 1.0, 2.0};
    c.value = {0.2, 1.0, 0.5};
    const std::int64_t n = 400;
    double sum = 0.0;
    double sum2 = 0.0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) {
        const double v = nfcl::add_shot_noise(c, n, static_cast<std::uint64_t>(s)).value[1];
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / seeds;
    const double var = (sum2 - seeds * mean * mean) / (seeds - 1);
    const double expected = 1.0 / static_cast<double>(n); // mean / counts_at_max with mean = 1
    EXPECT_NEAR(var, expected, 0.1 * expected);
    const auto once = nfcl::add_shot_noise(c, n, 1);
    EXPECT_NEAR((*once.uncertainty)[1], std::sqrt(400.0) / 400.0, 1e-15);
}

TEST(ShotNoise, RejectsNonPositiveCounts) {
    const auto& m = reference_model();
    EXPECT_THROW(nfcl::add_shot_noise(m, 0, 1), nfcl::DomainError);
    EXPECT_THROW(nfcl::add_shot_noise(m, -5, 1), nfcl::DomainError);
}

TEST(FitScan, NoiselessRoundTrip) {
    const auto& model = reference_model();
    const auto data = shifted_data(model, 1.7, 23 * nm, 1 * nm);
    const auto fit = nfcl::fit_scan(data, model);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.param("amplitude"), 1.7, 1e-6);
    EXPECT_NEAR(fit.param("offset_nm"), 23.0, 1e-6);
}

TEST(FitScan, LinearInAmplitude) {
    const auto& model = reference_model();
    auto data = shifted_data(model, 1.0, -12 * nm, 4 * nm);
    const auto base = nfcl::fit_scan(data, model);
    for (double& v : data.value) {
        v *= 3.25;
    }
    const auto scaled = nfcl::fit_scan(data, model);
    EXPECT_NEAR(scaled.param("amplitude"), 3.25 * base.param("amplitude"), 1e-9 * 3.25);
    EXPECT_NEAR(scaled.param("offset_nm"), base.param("offset_nm"), 1e-9);
}

TEST(FitScan, MonteCarloCoverage) {
    const auto& model = reference_model();
    const auto clean = shifted_data(model, 1.0, 23 * nm, 5 * nm);
    int covered = 0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        const auto noisy = nfcl::add_shot_noise(clean, 10000, static_cast<std::uint64_t>(s + 1));
        const auto fit = nfcl::fit_scan(noisy, model);
        const double se = fit.standard_error("offset_nm").value_or(0.0);
        if (fit.converged && std::abs(fit.param("offset_nm") - 23.0) <= 3.0 * se) {
            ++covered;
        }
    }
    EXPECT_GE(covered, 190);
}

TEST(FitScan, CostNeverIncreases) {
    const auto& model = reference_model();
    const auto noisy = nfcl::add_shot_noise(shifted_data(model, 0.8, 40 * nm, 5 * nm), 2000, 11);
    const auto fit = nfcl::fit_scan(noisy, model);
    ASSERT_GE(fit.cost_history.size(), 2u);
    for (std::size_t i = 1; i < fit.cost_history.size(); ++i) {
        EXPECT_LE(fit.cost_history[i], fit.cost_history[i - 1]);
    }
}

TEST(FitScan, IterationLimitReportsBestSoFar) {
    const auto& model = reference_model();
    const auto data = shifted_data(model, 1.7, 23 * nm, 5 * nm);
    nfcl::FitOptions opt;
    opt.max_iterations = 1;
    const auto fit = nfcl::fit_scan(data, model, opt);
    EXPECT_FALSE(fit.converged);
    EXPECT_EQ(fit.iterations, 1);
    EXPECT_TRUE(std::isfinite(fit.residual_norm));
}

TEST(FitScan, RejectsTooFewPoints) {
    const auto& model = reference_model();
    ScanCurve data;
    data.x = {0.0, 1 * nm, 2 * nm, 3 * nm};
    data.value = {1.0, 1.0, 1.0, 1.0};
    EXPECT_THROW(nfcl::fit_scan(data, model), nfcl::DomainError);
}

TEST(FitLorentzian, NoiselessRecovery) {
    const auto l = nfcl::uniform_grid(600 * nm, 720 * nm, 121);
    const auto spec = nfcl::lorentzian_spectrum(l, 1.0, 659 * nm, 28 * nm);
    const auto fit = nfcl::fit_lorentzian(spec);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.param("amplitude"), 1.0, 1e-8);
    EXPECT_NEAR(fit.param("center_nm"), 659.0, 1e-8);
    EXPECT_NEAR(fit.param("fwhm_nm"), 28.0, 1e-8);
}

TEST(FitLorentzian, TranslationEquivariant) {
    const auto l = nfcl::uniform_grid(600 * nm, 720 * nm, 121);
    const auto spec = nfcl::lorentzian_spectrum(l, 1.0, 659 * nm, 28 * nm);
    auto shifted = spec;
    for (double& x : shifted.x) {
        x += 5 * nm;
    }
    const auto a = nfcl::fit_lorentzian(spec);
    const auto b = nfcl::fit_lorentzian(shifted);
    EXPECT_NEAR(b.param("center_nm") - a.param("center_nm"), 5.0, 1e-8);
    EXPECT_NEAR(b.param("fwhm_nm"), a.param("fwhm_nm"), 1e-8);
}

TEST(FitLorentzian, MultiplicativeNoiseCoverage) {
    const auto l = nfcl::uniform_grid(600 * nm, 720 * nm, 121);
    const auto clean = nfcl::lorentzian_spectrum(l, 1.0, 659 * nm, 28 * nm);
    int hits = 0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(s));
        std::normal_distribution<double> noise(0.0, 0.05);
        auto noisy = clean;
        for (double& v : noisy.value) {
            v *= 1.0 + noise(rng);
        }
        const auto fit = nfcl::fit_lorentzian(noisy);
        if (std::abs(fit.param("center_nm") - 659.0) <= 1.0 && std::abs(fit.param("fwhm_nm") - 28.0) <= 3.0) {
            ++hits;
        }
    }
    EXPECT_GE(hits, 180);
}

TEST(FitLorentzian, RequiresEnoughSpan) {
    const auto narrow = nfcl::uniform_grid(655 * nm, 663 * nm, 9);
    EXPECT_THROW(nfcl::fit_lorentzian(nfcl::lorentzian_spectrum(narrow, 1.0, 659 * nm, 28 * nm)),
                 nfcl::DomainError);
    const auto few = nfcl::uniform_grid(600 * nm, 720 * nm, 6);
    EXPECT_THROW(nfcl::fit_lorentzian(nfcl::lorentzian_spectrum(few, 1.0, 659 * nm, 28 * nm)),
                 nfcl::DomainError);
}
