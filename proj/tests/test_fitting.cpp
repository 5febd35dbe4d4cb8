#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "atomfringe/errors.hpp"
#include "atomfringe/fitting.hpp"
#include "atomfringe/generator.hpp"
#include "atomfringe/random.hpp"

using namespace atomfringe;

namespace {

std::mt19937_64 rng(0x5eed0005);

InstrumentGeometry lithium_like() {
    InstrumentGeometry g;
    g.kappa = 2.0 * std::numbers::pi / 400e-9;
    g.t0 = 1e-3;
    g.bragg_angle = 1e-4;
    g.velocity = 1e3;
    g.theta0 = 0.0;
    return g;
}

std::vector<double> scan_grid(const InstrumentGeometry& g, int points, double periods = 2.0) {
    const double span = periods * 2.0 * std::numbers::pi / g.kappa;
    std::vector<double> xs(points);
    for (int i = 0; i < points; ++i) xs[i] = span * i / (points - 1);
    return xs;
}

FringeDataset noiseless_dataset(const FringeModel& model, const InstrumentGeometry& g,
                                int points, Port port) {
    FringeDataset ds;
    ds.port = port;
    ds.geometry = g;
    for (double x : scan_grid(g, points))
        ds.samples.push_back(
            {x, static_cast<std::int64_t>(std::llround(model.eval(g, x, port)))});
    return ds;
}

// lithium-regime truth used by several cases
struct Regime {
    InstrumentGeometry g = lithium_like();
    double contrast = 0.74;
    double alpha = gev_to_angular_frequency(0.3e-23);  // ~4.56 s^-1
    double omega = gev_to_angular_frequency(0.20e-21); // ~303.9 s^-1
    double n0 = 1e4;

    FringeParams fringe() const {
        return FringeParams::from_physics(n0, n0, contrast, contrast, alpha, omega, g.t0);
    }
};

} // namespace

TEST_CASE("chi2 definition") {
    const InstrumentGeometry g = lithium_like();
    const FringeModel model{1000.0, 0.3, 0.2, 0.0};

    FringeDataset exact;
    exact.port = Port::Minus;
    exact.geometry = g;
    for (double x : scan_grid(g, 20)) {
        const double mean = model.eval(g, x, Port::Minus);
        exact.samples.push_back({x, static_cast<std::int64_t>(std::llround(mean))});
    }

    // integer rounding keeps this near but not exactly zero
    CHECK(chi2(model, exact) < 20 * 0.25 / 500.0);

    FringeDataset shifted = exact;
    for (auto& s : shifted.samples) {
        // displace each point by exactly one sigma = sqrt(counts)
        const double sigma = std::sqrt(static_cast<double>(s.counts));
        s.counts += static_cast<std::int64_t>(std::llround(sigma));
    }
    // chi2 ~ N with sigma recomputed from the shifted counts
    const double value = chi2(model, shifted);
    CHECK(value > 0.8 * shifted.samples.size());
    CHECK(value < 1.2 * shifted.samples.size());

    // independent direct summation oracle
    double oracle = 0.0;
    for (const auto& s : shifted.samples) {
        const double phase = g.kappa * s.x;
        const double mean =
            1000.0 * (1.0 - (0.3 * std::cos(phase) + 0.2 * std::sin(phase)));
        const double sigma2 = std::max<double>(static_cast<double>(s.counts), 1.0);
        oracle += (s.counts - mean) * (s.counts - mean) / sigma2;
    }
    CHECK(chi2(model, shifted) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("chi2 on a model built from exact expectations is zero") {
    // non-integer expectations stored as a real-valued model evaluated at
    // integer counts: use a model whose expectations are integers
    const InstrumentGeometry g = lithium_like();
    const FringeModel model{1000.0, 0.0, 0.0, 0.0};
    const FringeDataset ds = noiseless_dataset(model, g, 12, Port::Minus);
    CHECK(chi2(model, ds) == 0.0);
}

TEST_CASE("fit recovers noiseless parameters") {
    const InstrumentGeometry g = lithium_like();
    const double theta0 = 0.4;
    const FringeModel truth{2.5e5, 0.31, -0.17, theta0};

    FringeDataset ds;
    ds.port = Port::Minus;
    ds.geometry = g;
    // n0 large enough that integer rounding is far below the tolerance
    for (double x : scan_grid(g, 40))
        ds.samples.push_back(
            {x, static_cast<std::int64_t>(std::llround(truth.eval(g, x, Port::Minus)))});

    const FitResult fit = fit_fringe(ds, theta0);
    CHECK(fit.converged);
    CHECK(fit.theta0_fixed);
    CHECK(fit.n0 == doctest::Approx(truth.n0).epsilon(1e-6));
    CHECK(fit.p == doctest::Approx(truth.p).epsilon(1e-5));
    CHECK(fit.q == doctest::Approx(truth.q).epsilon(1e-5));
    CHECK(fit.dof == 37);
    CHECK(fit.chi2 < 1.0); // pure rounding residue
}

TEST_CASE("free mode pins theta0 to zero and absorbs the phase") {
    const InstrumentGeometry g = lithium_like();
    const double theta0 = 0.9;
    const FringeModel truth{2.5e5, 0.31, -0.17, theta0};
    FringeDataset ds;
    ds.port = Port::Minus;
    ds.geometry = g;
    for (double x : scan_grid(g, 40))
        ds.samples.push_back(
            {x, static_cast<std::int64_t>(std::llround(truth.eval(g, x, Port::Minus)))});

    const FitResult fit = fit_fringe(ds);
    CHECK(fit.converged);
    CHECK_FALSE(fit.theta0_fixed);
    CHECK(fit.theta0 == 0.0);
    // same fringe, rotated parametrization: (p, q) picks up exp(-i theta0)
    CHECK(std::hypot(fit.p, fit.q) == doctest::Approx(std::hypot(0.31, 0.17)).epsilon(1e-5));
    CHECK(std::atan2(fit.q, fit.p) ==
          doctest::Approx(std::atan2(-0.17, 0.31) - theta0).epsilon(1e-5));
}

TEST_CASE("fit validates the dataset") {
    const InstrumentGeometry g = lithium_like();
    FringeDataset tiny;
    tiny.geometry = g;
    tiny.port = Port::Minus;
    for (int i = 0; i < 5; ++i) tiny.samples.push_back({i * 1e-7, 100});
    CHECK_THROWS_AS(fit_fringe(tiny, 0.0), ValidationError);

    FringeDataset narrow;
    narrow.geometry = g;
    narrow.port = Port::Minus;
    for (int i = 0; i < 12; ++i) narrow.samples.push_back({i * 1e-9, 100});
    CHECK_THROWS_AS(fit_fringe(narrow, 0.0), ValidationError); // < one period span
}

TEST_CASE("synthetic datasets are deterministic and Poisson-consistent") {
    const Regime r;
    const auto xs = scan_grid(r.g, 50);
    const FringeDataset ds1 = synth_dataset(r.fringe(), r.g, xs, 1234, Port::Minus);
    const FringeDataset ds2 = synth_dataset(r.fringe(), r.g, xs, 1234, Port::Minus);
    REQUIRE(ds1.samples.size() == ds2.samples.size());
    for (std::size_t i = 0; i < ds1.samples.size(); ++i)
        CHECK(ds1.samples[i].counts == ds2.samples[i].counts);

    const FringeDataset other = synth_dataset(r.fringe(), r.g, xs, 1235, Port::Minus);
    bool any_different = false;
    for (std::size_t i = 0; i < ds1.samples.size(); ++i)
        any_different |= ds1.samples[i].counts != other.samples[i].counts;
    CHECK(any_different);
}

TEST_CASE("synthetic sample mean approaches the expectation") {
    const Regime r;
    const double x = 137e-9;
    const double mean = fringe_counts(r.fringe(), r.g, x, Port::Minus);

    const int draws = 100000;
    const std::vector<double> xs(draws, x);
    const FringeDataset ds = synth_dataset(r.fringe(), r.g, xs, 77, Port::Minus);
    double sum = 0.0;
    for (const auto& s : ds.samples) sum += static_cast<double>(s.counts);
    const double sample_mean = sum / draws;
    const double tolerance = 5.0 * std::sqrt(mean / draws);
    CHECK(std::abs(sample_mean - mean) < tolerance);
}

TEST_CASE("zero expectation gives all-zero counts") {
    FringeParams fp; // all zero
    const InstrumentGeometry g = lithium_like();
    const FringeDataset ds = synth_dataset(fp, g, scan_grid(g, 10), 5, Port::Minus);
    for (const auto& s : ds.samples) CHECK(s.counts == 0);
}

TEST_CASE("negative expectations are rejected") {
    FringeParams fp;
    fp.n0_minus = 100.0;
    fp.p_minus = 1.5; // oscillation exceeds 1: negative expectation somewhere
    const InstrumentGeometry g = lithium_like();
    CHECK_THROWS_AS(synth_dataset(fp, g, scan_grid(g, 20), 5, Port::Minus),
                    ValidationError);
}

TEST_CASE("poisson sampler moments") {
    std::mt19937_64 local(2024);
    for (double mean : {0.5, 4.0, 40.0, 9000.0}) {
        const int draws = 40000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double k = static_cast<double>(poisson_sample(local, mean));
            sum += k;
            sum2 += k * k;
        }
        const double m = sum / draws;
        const double var = sum2 / draws - m * m;
        CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / draws));
        CHECK(var == doctest::Approx(mean).epsilon(0.05));
    }
}

TEST_CASE("visibility contrast") {
    const InstrumentGeometry g = lithium_like();

    FringeDataset flat;
    flat.geometry = g;
    flat.port = Port::Minus;
    for (double x : scan_grid(g, 30)) flat.samples.push_back({x, 500});
    CHECK(visibility_contrast(flat) == 0.0);

    // neon-like and lithium-like regimes on dense noiseless scans
    for (double contrast : {0.62, 0.74}) {
        FringeDataset ds;
        ds.geometry = g;
        ds.port = Port::Minus;
        const FringeParams fp =
            FringeParams::from_physics(1e6, 1e6, contrast, contrast, 0.0, 0.0, g.t0);
        for (double x : scan_grid(ds.geometry, 400))
            ds.samples.push_back({x, static_cast<std::int64_t>(
                                         std::llround(fringe_counts(fp, ds.geometry, x,
                                                                    Port::Minus)))});
        CHECK(visibility_contrast(ds, VisibilityMethod::Extrema) ==
              doctest::Approx(contrast).epsilon(1e-5));
        // the quantile variant is biased low by averaging near-extremal bands
        CHECK(visibility_contrast(ds) == doctest::Approx(contrast).epsilon(0.02));
    }
}

TEST_CASE("extract_dissipative: branch convention and identities") {
    const double t0 = 1e-3;

    FitResult fit;
    fit.converged = true;
    fit.covariance = Eigen::Matrix3d::Identity() * 1e-8;

    // p = q: tan(2 omega t0) = 1 so omega = pi / (8 t0)
    fit.p = fit.q = 0.5;
    const DissipativeEstimate est = extract_dissipative(fit, 1.0, t0);
    CHECK(est.omega == doctest::Approx(std::numbers::pi / (8.0 * t0)).epsilon(1e-12));

    // round trip through pq_from_physics over the principal branch
    for (int i = 0; i < 300; ++i) {
        const double contrast = 0.3 + 0.7 * uniform_unit(rng);
        const double alpha = (0.05 + 2.0 * uniform_unit(rng)) / (2.0 * t0) * 0.5;
        const double omega =
            (uniform_unit(rng) - 0.5) * 0.98 * std::numbers::pi / (2.0 * t0);
        auto [p, q] = pq_from_physics(contrast, alpha, omega, t0);
        fit.p = p;
        fit.q = q;
        const DissipativeEstimate back = extract_dissipative(fit, contrast, t0);
        CHECK(back.alpha == doctest::Approx(alpha).epsilon(1e-6));
        CHECK(back.omega == doctest::Approx(omega).epsilon(1e-6).scale(1.0 / t0));
    }
}

TEST_CASE("extract_dissipative flags the unphysical region") {
    FitResult fit;
    fit.converged = true;
    fit.covariance = Eigen::Matrix3d::Identity() * 1e-8;
    fit.p = 0.8;
    fit.q = 0.0;
    const DissipativeEstimate est = extract_dissipative(fit, 0.5, 1e-3);
    CHECK(est.alpha == 0.0);
    CHECK(est.alpha_clamped);
    CHECK_FALSE(est.warnings.empty());
}

TEST_CASE("extract_dissipative propagates the contrast uncertainty") {
    FitResult fit;
    fit.converged = true;
    fit.covariance = Eigen::Matrix3d::Zero();
    fit.p = 0.5;
    fit.q = 0.0;
    const double t0 = 1e-3;
    const DissipativeEstimate tight = extract_dissipative(fit, 0.74, t0, 0.0);
    const DissipativeEstimate loose = extract_dissipative(fit, 0.74, t0, 0.074);
    CHECK(tight.alpha_err == 0.0);
    CHECK(loose.alpha_err == doctest::Approx(0.1 / (2.0 * t0)).epsilon(1e-12));
    CHECK(loose.omega_err == 0.0); // omega does not depend on the contrast
}

TEST_CASE("fit statistics are calibrated at the lithium regime") {
    const Regime r;
    const auto xs = scan_grid(r.g, 50);
    auto [p_true, q_true] = pq_from_physics(r.contrast, r.alpha, r.omega, r.g.t0);

    const int trials = 600;
    int covered = 0;
    double sum_chi2_per_dof = 0.0;
    double sum_p = 0.0, sum_p2 = 0.0, sum_sigma_p = 0.0;
    std::mt19937_64 seeder(31415);
    for (int trial = 0; trial < trials; ++trial) {
        const FringeDataset ds = synth_dataset(r.fringe(), r.g, xs, seeder(), Port::Minus);
        const FitResult fit = fit_fringe(ds, r.g.theta0);
        REQUIRE(fit.converged);

        const double sigma_p = std::sqrt(fit.covariance(1, 1));
        if (std::abs(fit.p - p_true) < 3.0 * sigma_p) ++covered;
        sum_p += fit.p;
        sum_p2 += fit.p * fit.p;
        sum_sigma_p += sigma_p;
        sum_chi2_per_dof +=
            chi2(FringeModel{r.n0, p_true, q_true, r.g.theta0}, ds) / ds.samples.size();
    }

    // 3-sigma coverage
    CHECK(covered >= static_cast<int>(0.985 * trials));

    // chi^2/dof at the true parameters averages 1 (correct weighting)
    CHECK(sum_chi2_per_dof / trials == doctest::Approx(1.0).epsilon(0.1));

    // bias below a tenth of a standard error
    const double mean_p = sum_p / trials;
    const double scatter = std::sqrt(sum_p2 / trials - mean_p * mean_p);
    const double mean_sigma = sum_sigma_p / trials;
    CHECK(std::abs(mean_p - p_true) < 0.1 * mean_sigma * std::sqrt(40.0 / trials) +
                                          0.1 * mean_sigma);

    // reported errors match the Monte Carlo scatter within 15%
    CHECK(mean_sigma == doctest::Approx(scatter).epsilon(0.15));
}

TEST_CASE("flat truth fits to an amplitude consistent with zero") {
    const InstrumentGeometry g = lithium_like();
    const FringeParams fp = FringeParams::from_physics(1e4, 1e4, 0.0, 0.0, 0.0, 0.0, g.t0);
    const auto xs = scan_grid(g, 50);

    int consistent = 0;
    const int trials = 100;
    std::mt19937_64 seeder(999);
    for (int trial = 0; trial < trials; ++trial) {
        const FringeDataset ds = synth_dataset(fp, g, xs, seeder(), Port::Minus);
        const FitResult fit = fit_fringe(ds, 0.0);
        REQUIRE(fit.converged);
        const double amp = std::hypot(fit.p, fit.q);
        const double sigma =
            std::sqrt(std::max(fit.covariance(1, 1), fit.covariance(2, 2)));
        if (amp < 3.5 * sigma) ++consistent;
    }
    CHECK(consistent >= 95);
}

TEST_CASE("two-time separation recovers alpha, omega and the contrast") {
    const Regime r;
    InstrumentGeometry g2 = r.g;
    g2.t0 = 2.0 * r.g.t0;
    // raise alpha so the amplitude ratio is informative at these scales
    const double alpha = 150.0;
    const FringeParams fp1 =
        FringeParams::from_physics(r.n0, r.n0, r.contrast, r.contrast, alpha, r.omega, r.g.t0);
    const FringeParams fp2 =
        FringeParams::from_physics(r.n0, r.n0, r.contrast, r.contrast, alpha, r.omega, g2.t0);
    const auto xs = scan_grid(r.g, 50);

    int covered = 0;
    const int trials = 300;
    std::mt19937_64 seeder(271828);
    for (int trial = 0; trial < trials; ++trial) {
        const FitResult fit1 =
            fit_fringe(synth_dataset(fp1, r.g, xs, seeder(), Port::Minus), r.g.theta0);
        const FitResult fit2 =
            fit_fringe(synth_dataset(fp2, g2, xs, seeder(), Port::Minus), g2.theta0);
        REQUIRE(fit1.converged);
        REQUIRE(fit2.converged);
        const DissipativeEstimate est = two_time_separation(fit1, r.g.t0, fit2, g2.t0);
        const bool ok = std::abs(est.alpha - alpha) < 3.0 * est.alpha_err &&
                        std::abs(est.omega - r.omega) < 3.0 * est.omega_err &&
                        std::abs(est.contrast_used - r.contrast) < 3.0 * est.contrast_err;
        if (ok) ++covered;
    }
    CHECK(covered >= static_cast<int>(0.97 * trials));
}

TEST_CASE("two-time separation null cases") {
    const Regime r;
    InstrumentGeometry g2 = r.g;
    g2.t0 = 2.0 * r.g.t0;
    const auto xs = scan_grid(r.g, 50);

    // alpha = 0 truth: amplitude ratio consistent with one
    {
        const FringeParams fp1 =
            FringeParams::from_physics(r.n0, r.n0, 0.74, 0.74, 0.0, r.omega, r.g.t0);
        const FringeParams fp2 =
            FringeParams::from_physics(r.n0, r.n0, 0.74, 0.74, 0.0, r.omega, g2.t0);
        const FitResult fit1 =
            fit_fringe(synth_dataset(fp1, r.g, xs, 11, Port::Minus), r.g.theta0);
        const FitResult fit2 =
            fit_fringe(synth_dataset(fp2, g2, xs, 12, Port::Minus), g2.theta0);
        const DissipativeEstimate est = two_time_separation(fit1, r.g.t0, fit2, g2.t0);
        CHECK(std::abs(est.alpha) < 3.5 * est.alpha_err);
    }

    // omega = 0 truth: phase difference consistent with zero
    {
        const FringeParams fp1 =
            FringeParams::from_physics(r.n0, r.n0, 0.74, 0.74, 100.0, 0.0, r.g.t0);
        const FringeParams fp2 =
            FringeParams::from_physics(r.n0, r.n0, 0.74, 0.74, 100.0, 0.0, g2.t0);
        const FitResult fit1 =
            fit_fringe(synth_dataset(fp1, r.g, xs, 13, Port::Minus), r.g.theta0);
        const FitResult fit2 =
            fit_fringe(synth_dataset(fp2, g2, xs, 14, Port::Minus), g2.theta0);
        const DissipativeEstimate est = two_time_separation(fit1, r.g.t0, fit2, g2.t0);
        CHECK(std::abs(est.omega) < 3.5 * est.omega_err);
    }
}

TEST_CASE("two-time separation validates its inputs") {
    FitResult bad;
    bad.converged = false;
    FitResult good;
    good.converged = true;
    good.p = 0.5;
    CHECK_THROWS_AS(two_time_separation(bad, 1e-3, good, 2e-3), ValidationError);
    CHECK_THROWS_AS(two_time_separation(good, 1e-3, good, 1e-3), ValidationError);
}
