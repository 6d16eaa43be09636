#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sspd/errors.hpp"
#include "sspd/photon_stats.hpp"
#include "sspd/rng.hpp"

using namespace sspd;
using namespace sspd::photon;

namespace {

G2Curve sample_ideal(const EmitterParams& em, double lo, double hi, double step) {
    G2Curve c;
    for (double t = lo; t <= hi + 0.5 * step; t += step) {
        c.tau_ns.push_back(t);
        c.g2.push_back(g2_ideal(em, t));
    }
    return c;
}

} // namespace

TEST_CASE("emitter steady state follows the two-level rate equations") {
    EmitterParams em; // defaults: lifetime 3 ns, pump 1/30 per ns
    const double R = em.pump_rate_per_ns;
    const double g = 1.0 / em.lifetime_ns;
    CHECK(em.gamma_per_ns() == doctest::Approx(g).epsilon(1e-15));
    CHECK(em.excited_population() == doctest::Approx(R / (R + g)).epsilon(1e-15));
    CHECK(em.excited_population() == doctest::Approx(1.0 / 11.0).epsilon(1e-14));
    CHECK(em.emission_rate_per_ns() ==
          doctest::Approx(g * R / (R + g)).epsilon(1e-15));
    CHECK(em.emission_rate_per_ns() == doctest::Approx(1.0 / 33.0).epsilon(1e-14));

    // Strong pump saturates the excited population toward 1.
    EmitterParams hard = em;
    hard.pump_rate_per_ns = 100.0 / em.lifetime_ns;
    CHECK(hard.excited_population() > 0.99);
    CHECK(hard.excited_population() < 1.0);
}

TEST_CASE("emitter parameter validation") {
    EmitterParams em;
    em.lifetime_ns = 0.0;
    CHECK_THROWS_AS(em.validate(), ConfigError);
    em.lifetime_ns = -1.0;
    CHECK_THROWS_AS(em.validate(), ConfigError);
    em = EmitterParams{};
    em.pump_rate_per_ns = 0.0;
    CHECK_THROWS_AS(em.validate(), ConfigError);
    em.pump_rate_per_ns = -0.1;
    CHECK_THROWS_AS(em.validate(), ConfigError);
    CHECK_NOTHROW(EmitterParams{}.validate());
}

TEST_CASE("population after a pulse decays exponentially") {
    EmitterParams em;
    em.lifetime_ns = 12.0;
    CHECK(excited_population_after_pulse(em, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(excited_population_after_pulse(em, 12.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(excited_population_after_pulse(em, 12.0 * std::log(2.0)) ==
          doctest::Approx(0.5).epsilon(1e-13));
    CHECK_THROWS_AS((void)excited_population_after_pulse(em, -1.0), ConfigError);
}

TEST_CASE("ideal correlation: antibunched dip with rate-sum recovery") {
    EmitterParams em; // Γ = R + γ = 11/30 per ns
    const double Gamma = em.pump_rate_per_ns + em.gamma_per_ns();
    CHECK(g2_ideal(em, 0.0) == 0.0);
    for (double t : {0.3, 1.0, 4.5, 20.0}) {
        CHECK(g2_ideal(em, t) ==
              doctest::Approx(1.0 - std::exp(-Gamma * t)).epsilon(1e-14));
        CHECK(g2_ideal(em, -t) == doctest::Approx(g2_ideal(em, t)).epsilon(1e-15));
        CHECK(g2_ideal(em, t) > 0.0);
        CHECK(g2_ideal(em, t) < 1.0);
    }
    CHECK(g2_ideal(em, 1e4) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("background adjustment matches the rate-product formula and bounds") {
    ChannelRates ch1{20000.0, 9250.0};
    ChannelRates ch2{18000.0, 4000.0};
    const double g2 = 0.25;
    const double s1 = ch1.signal_cps, n1 = ch1.noise_cps;
    const double s2 = ch2.signal_cps, n2 = ch2.noise_cps;
    const double expect = (g2 * s1 * s2 + n1 * n2 + n1 * s2 + n2 * s1) /
                          ((s1 + n1) * (s2 + n2));
    const double got = background_adjust(g2, ch1, ch2);
    CHECK(got == doctest::Approx(expect).epsilon(1e-15));
    // Noise pulls an antibunched value toward 1 but never past it.
    CHECK(got > g2);
    CHECK(got < 1.0);

    // No noise: the measured value is the emitter value.
    ChannelRates clean{5000.0, 0.0};
    CHECK(background_adjust(0.1, clean, clean) == doctest::Approx(0.1).epsilon(1e-15));
    // No signal: coincidences are purely Poissonian.
    ChannelRates noiseonly{0.0, 700.0};
    CHECK(background_adjust(0.0, noiseonly, noiseonly) ==
          doctest::Approx(1.0).epsilon(1e-15));
    // g2 = 1 light is unchanged by any noise admixture.
    CHECK(background_adjust(1.0, ch1, ch2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("background compensation inverts the adjustment over random draws") {
    rng::RandomStream rng(20260822, "compensation-roundtrip");
    for (int i = 0; i < 1000; ++i) {
        ChannelRates ch1{1.0 + 1e5 * rng.uniform(), 1e4 * rng.uniform()};
        ChannelRates ch2{1.0 + 1e5 * rng.uniform(), 1e4 * rng.uniform()};
        const double g2 = 2.0 * rng.uniform(); // cover antibunched and bunched
        const double measured = background_adjust(g2, ch1, ch2);
        const double back = background_compensate(measured, ch1, ch2);
        CHECK(std::abs(back - g2) < 1e-12 * std::max(1.0, std::abs(g2)));
    }
}

TEST_CASE("compensation rejects channels with no signal") {
    ChannelRates good{1000.0, 10.0};
    ChannelRates nosig{0.0, 500.0};
    CHECK_THROWS_WITH_AS(
        (void)background_compensate(0.9, nosig, good),
        doctest::Contains("no signal to compensate"), ConfigError);
    CHECK_THROWS_AS((void)background_compensate(0.9, good, nosig), ConfigError);
}

TEST_CASE("rate validation rejects negative and all-zero channels") {
    ChannelRates bad{-1.0, 10.0};
    ChannelRates good{100.0, 1.0};
    ChannelRates zero{0.0, 0.0};
    CHECK_THROWS_AS((void)background_adjust(0.5, bad, good), ConfigError);
    CHECK_THROWS_AS((void)background_adjust(0.5, good, zero), ConfigError);
    CHECK_THROWS_AS((void)background_compensate(0.5, zero, good), ConfigError);
}

TEST_CASE("jitter kernel conserves mass and preserves symmetry") {
    EmitterParams em;
    const double sigma = 0.2;
    // A constant curve must come back unchanged: the kernel is normalized and
    // the edges are extended, so no mass can leak.
    G2Curve flat;
    for (int i = 0; i <= 400; ++i) {
        flat.tau_ns.push_back(-5.0 + i * 0.025);
        flat.g2.push_back(1.0);
    }
    const G2Curve flat_out = jitter_convolve(flat, sigma);
    REQUIRE(flat_out.g2.size() == flat.g2.size());
    for (double v : flat_out.g2) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    // The dip is even in delay; convolution with an even kernel keeps it even.
    const G2Curve dip = sample_ideal(em, -8.0, 8.0, sigma / 8.0);
    const G2Curve out = jitter_convolve(dip, sigma);
    const std::size_t n = out.g2.size();
    REQUIRE(out.tau_ns.size() == n);
    for (std::size_t i = 0; i < n / 2; ++i)
        CHECK(out.g2[i] == doctest::Approx(out.g2[n - 1 - i]).epsilon(1e-10));
    // Jitter fills the dip in: the convolved zero-delay value is positive and
    // the curve still lies within [0, 1].
    const std::size_t mid = n / 2;
    CHECK(out.g2[mid] > dip.g2[mid]);
    for (double v : out.g2) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("sampled convolution agrees with the closed form") {
    EmitterParams em;
    const double sigma = fwhm_to_sigma(0.35);
    const double step = sigma / 16.0;
    const G2Curve in = sample_ideal(em, -12.0, 12.0, step);
    const G2Curve out = jitter_convolve(in, sigma);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.tau_ns.size(); ++i) {
        const double t = out.tau_ns[i];
        if (std::abs(t) > 12.0 - 8.0 * sigma) continue; // edge-extension zone
        worst = std::max(worst,
                         std::abs(out.g2[i] - g2_ideal_jittered(em, t, sigma)));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("closed-form jittered correlation limits and symmetry") {
    EmitterParams em;
    const double sigma = 0.1;
    // σ = 0 reduces exactly to the ideal curve.
    for (double t : {-3.0, -0.4, 0.0, 0.7, 5.0})
        CHECK(g2_ideal_jittered(em, t, 0.0) ==
              doctest::Approx(g2_ideal(em, t)).epsilon(1e-15));
    // Small σ stays close to the ideal curve away from the cusp.
    CHECK(g2_ideal_jittered(em, 2.0, 1e-4) ==
          doctest::Approx(g2_ideal(em, 2.0)).epsilon(1e-7));
    // Even in delay; dip partially filled at zero; bounded by (0, 1).
    for (double t : {0.2, 1.1, 4.0})
        CHECK(g2_ideal_jittered(em, t, sigma) ==
              doctest::Approx(g2_ideal_jittered(em, -t, sigma)).epsilon(1e-13));
    const double z = g2_ideal_jittered(em, 0.0, sigma);
    CHECK(z > 0.0);
    CHECK(z < 1.0);
    CHECK(z > g2_ideal(em, 0.0));
    // Far from the dip the correlation recovers to 1 (e^{-100Γ} is below
    // double precision).
    CHECK(g2_ideal_jittered(em, 100.0, sigma) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // More jitter fills the dip more.
    CHECK(g2_ideal_jittered(em, 0.0, 2.0 * sigma) > z);
    CHECK_THROWS_AS((void)g2_ideal_jittered(em, 0.0, -0.1), ConfigError);
}

TEST_CASE("convolution guards: spacing, uniformity, and degenerate input") {
    EmitterParams em;
    const double sigma = 0.2;
    // Grid coarser than σ/4 is refused, and the message names the bound.
    const G2Curve coarse = sample_ideal(em, -3.0, 3.0, sigma / 2.0);
    CHECK_THROWS_WITH_AS((void)jitter_convolve(coarse, sigma),
                         doctest::Contains("need spacing <="), ConfigError);
    // σ = 0 passes any grid through untouched.
    const G2Curve same = jitter_convolve(coarse, 0.0);
    CHECK(same.g2 == coarse.g2);
    CHECK(same.tau_ns == coarse.tau_ns);

    G2Curve tiny;
    tiny.tau_ns = {0.0};
    tiny.g2 = {1.0};
    CHECK_THROWS_AS((void)jitter_convolve(tiny, sigma), ConfigError);

    G2Curve nonuniform = sample_ideal(em, -1.0, 1.0, sigma / 8.0);
    nonuniform.tau_ns.back() += 0.01;
    CHECK_THROWS_WITH_AS((void)jitter_convolve(nonuniform, sigma),
                         doctest::Contains("uniform"), ConfigError);

    G2Curve decreasing = sample_ideal(em, -1.0, 1.0, sigma / 8.0);
    std::swap(decreasing.tau_ns.front(), decreasing.tau_ns.back());
    CHECK_THROWS_AS((void)jitter_convolve(decreasing, sigma), ConfigError);

    CHECK_THROWS_AS((void)jitter_convolve(coarse, -1.0), ConfigError);
}

TEST_CASE("FWHM to sigma conversion") {
    const double fwhm = 0.35;
    const double sigma = fwhm_to_sigma(fwhm);
    CHECK(sigma * 2.0 * std::sqrt(2.0 * std::log(2.0)) ==
          doctest::Approx(fwhm).epsilon(1e-15));
    CHECK(fwhm_to_sigma(0.0) == 0.0);
    CHECK_THROWS_AS((void)fwhm_to_sigma(-0.1), ConfigError);
}

TEST_CASE("channel rates: 50/50 split, qe scaling, unscaled dark counts") {
    Scene scene; // 80000 / 800 cps at reference qe 0.2
    DetectorScenario det{"probe", 0.2, 0.1, 0.062};
    const ChannelRates at_ref = channel_rates(scene, det);
    CHECK(at_ref.signal_cps == doctest::Approx(40000.0).epsilon(1e-15));
    CHECK(at_ref.noise_cps == doctest::Approx(400.0 + 0.1).epsilon(1e-15));
    CHECK(at_ref.total_cps() ==
          doctest::Approx(at_ref.signal_cps + at_ref.noise_cps).epsilon(1e-15));

    // Tripling the qe triples signal and optical background but not the dark rate.
    det.qe = 0.6;
    det.dark_cps = 1500.0;
    const ChannelRates scaled = channel_rates(scene, det);
    CHECK(scaled.signal_cps == doctest::Approx(120000.0).epsilon(1e-15));
    CHECK(scaled.noise_cps == doctest::Approx(1200.0 + 1500.0).epsilon(1e-15));

    CHECK(channel_snr(at_ref) ==
          doctest::Approx(at_ref.signal_cps / at_ref.noise_cps).epsilon(1e-15));
}

TEST_CASE("scene and scenario validation") {
    Scene s;
    s.signal_cps_at_reference = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = Scene{};
    s.background_cps_at_reference = -1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = Scene{};
    s.reference_qe = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.reference_qe = 1.5;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_NOTHROW(Scene{}.validate());

    Scene ok;
    DetectorScenario bad_qe{"x", 0.0, 0.1, 0.062};
    CHECK_THROWS_AS((void)channel_rates(ok, bad_qe), ConfigError);
    DetectorScenario bad_dark{"x", 0.2, -1.0, 0.062};
    CHECK_THROWS_AS((void)channel_rates(ok, bad_dark), ConfigError);
}

TEST_CASE("measured zero-delay correlation reproduces the rational benchmark") {
    // With no jitter the emitter contributes exactly zero at zero delay, so the
    // measured value is a pure rate ratio: per channel S = 20000, N = 9250,
    // (N^2 + 2NS) / (S + N)^2 = 7289/13689.
    EmitterParams em;
    Scene scene;
    scene.signal_cps_at_reference = 40000.0;
    scene.background_cps_at_reference = 18500.0;
    scene.reference_qe = 0.2;
    DetectorScenario det{"no-jitter", 0.2, 0.0, 0.0};
    const double measured = g2_zero_measured(em, scene, det);
    CHECK(measured == doctest::Approx(7289.0 / 13689.0).epsilon(1e-12));

    // Compensating with the same channel rates recovers the ideal zero.
    const ChannelRates ch = channel_rates(scene, det);
    CHECK(std::abs(background_compensate(measured, ch, ch)) < 1e-12);
}

TEST_CASE("measured zero-delay correlation is invariant under pure qe rescaling") {
    // With no dark counts every channel rate scales by qe/reference, so the
    // measured value cannot depend on qe.
    EmitterParams em;
    Scene scene;
    DetectorScenario lo{"lo", 0.1, 0.0, 0.062};
    DetectorScenario hi{"hi", 0.9, 0.0, 0.062};
    CHECK(g2_zero_measured(em, scene, lo) ==
          doctest::Approx(g2_zero_measured(em, scene, hi)).epsilon(1e-13));
}

TEST_CASE("zero-delay sweep over lifetime matches pointwise evaluation") {
    Scene scene;
    DetectorScenario det{"sweep", 0.2, 0.1, 0.062};
    const std::vector<double> lifetimes{0.5, 1.0, 3.0, 10.0, 30.0};
    const double pump = 1.0 / 30.0;
    const auto curve = g2_zero_vs_lifetime(lifetimes, pump, scene, det);
    REQUIRE(curve.size() == lifetimes.size());
    for (std::size_t i = 0; i < lifetimes.size(); ++i) {
        EmitterParams em;
        em.lifetime_ns = lifetimes[i];
        em.pump_rate_per_ns = pump;
        CHECK(curve[i] ==
              doctest::Approx(g2_zero_measured(em, scene, det)).epsilon(1e-14));
    }
    // A slower emitter suffers less from timing jitter: the measured dip value
    // must not grow with lifetime.
    for (std::size_t i = 1; i < curve.size(); ++i)
        CHECK(curve[i] <= curve[i - 1] + 1e-12);
}

TEST_CASE("zero-delay sweep over qe matches pointwise evaluation") {
    EmitterParams em;
    Scene scene;
    DetectorScenario det{"noisy", 0.6, 1500.0, 0.35};
    const std::vector<double> qes{0.01, 0.05, 0.2, 0.6, 1.0};
    const auto curve = g2_zero_vs_qe(qes, em, scene, det);
    REQUIRE(curve.size() == qes.size());
    for (std::size_t i = 0; i < qes.size(); ++i) {
        DetectorScenario d = det;
        d.qe = qes[i];
        CHECK(curve[i] ==
              doctest::Approx(g2_zero_measured(em, scene, d)).epsilon(1e-14));
    }
    // With a fixed dark rate, higher qe means better signal-to-noise and a
    // deeper measured dip.
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] < curve[i - 1]);
}
