#include "sspd/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sspd/errors.hpp"

namespace sspd::photon {

void EmitterParams::validate() const {
    if (!(lifetime_ns > 0.0)) throw ConfigError("emitter: lifetime must be > 0");
    if (!(pump_rate_per_ns > 0.0)) throw ConfigError("emitter: pump rate must be > 0");
}

double EmitterParams::excited_population() const {
    validate();
    return pump_rate_per_ns / (pump_rate_per_ns + gamma_per_ns());
}

double EmitterParams::emission_rate_per_ns() const {
    return gamma_per_ns() * excited_population();
}

double excited_population_after_pulse(const EmitterParams& emitter, double t_ns) {
    emitter.validate();
    if (t_ns < 0.0) throw ConfigError("excited population: time must be >= 0");
    return std::exp(-t_ns * emitter.gamma_per_ns());
}

double g2_ideal(const EmitterParams& emitter, double tau_ns) {
    emitter.validate();
    const double rate = emitter.pump_rate_per_ns + emitter.gamma_per_ns();
    return 1.0 - std::exp(-std::abs(tau_ns) * rate);
}

namespace {

void validate_rates(const ChannelRates& ch, const char* which) {
    if (!(ch.signal_cps >= 0.0) || !(ch.noise_cps >= 0.0))
        throw ConfigError(std::string("channel rates (") + which +
                          "): rates must be >= 0");
    if (!(ch.total_cps() > 0.0))
        throw ConfigError(std::string("channel rates (") + which +
                          "): total rate must be > 0");
}

} // namespace

double background_adjust(double g2, const ChannelRates& ch1,
                         const ChannelRates& ch2) {
    validate_rates(ch1, "channel 1");
    validate_rates(ch2, "channel 2");
    const double s1 = ch1.signal_cps, n1 = ch1.noise_cps;
    const double s2 = ch2.signal_cps, n2 = ch2.noise_cps;
    return (g2 * s1 * s2 + n1 * n2 + n1 * s2 + n2 * s1) /
           ((s1 + n1) * (s2 + n2));
}

double background_compensate(double g2_measured, const ChannelRates& ch1,
                             const ChannelRates& ch2) {
    validate_rates(ch1, "channel 1");
    validate_rates(ch2, "channel 2");
    const double s1 = ch1.signal_cps, n1 = ch1.noise_cps;
    const double s2 = ch2.signal_cps, n2 = ch2.noise_cps;
    if (!(s1 > 0.0) || !(s2 > 0.0))
        throw ConfigError(
            "background compensation: no signal to compensate (a channel has zero "
            "signal rate)");
    return (g2_measured * (s1 + n1) * (s2 + n2) - n1 * n2 - n1 * s2 - n2 * s1) /
           (s1 * s2);
}

G2Curve jitter_convolve(const G2Curve& curve, double sigma_ns) {
    if (curve.tau_ns.size() != curve.g2.size() || curve.tau_ns.size() < 2)
        throw ConfigError("jitter convolution: need a sampled curve (>= 2 points)");
    if (sigma_ns < 0.0)
        throw ConfigError("jitter convolution: sigma must be >= 0");
    const std::size_t n = curve.tau_ns.size();
    const double dt = curve.tau_ns[1] - curve.tau_ns[0];
    if (!(dt > 0.0))
        throw ConfigError("jitter convolution: delay grid must be increasing");
    for (std::size_t i = 2; i < n; ++i) {
        const double step = curve.tau_ns[i] - curve.tau_ns[i - 1];
        if (std::abs(step - dt) > 1e-9 * dt)
            throw ConfigError("jitter convolution: delay grid must be uniform");
    }
    if (sigma_ns == 0.0) return curve;
    if (dt > sigma_ns / 4.0) {
        std::ostringstream msg;
        msg << "jitter convolution: grid spacing " << dt
            << " ns too coarse for sigma " << sigma_ns
            << " ns; need spacing <= " << sigma_ns / 4.0 << " ns";
        throw ConfigError(msg.str());
    }

    // Discrete Gaussian kernel, truncated at ±6σ, renormalized to unit sum.
    const int half = static_cast<int>(std::ceil(6.0 * sigma_ns / dt));
    std::vector<double> kernel(2 * half + 1);
    double mass = 0.0;
    for (int j = -half; j <= half; ++j) {
        const double w = std::exp(-0.5 * (j * dt) * (j * dt) / (sigma_ns * sigma_ns));
        kernel[j + half] = w;
        mass += w;
    }
    for (double& w : kernel) w /= mass;

    G2Curve out;
    out.tau_ns = curve.tau_ns;
    out.g2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = -half; j <= half; ++j) {
            // Extend by the edge values beyond the sampled window.
            const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(i) + j;
            const std::size_t clamped = static_cast<std::size_t>(
                std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(n) - 1));
            acc += kernel[j + half] * curve.g2[clamped];
        }
        out.g2[i] = acc;
    }
    return out;
}

double g2_ideal_jittered(const EmitterParams& emitter, double tau_ns,
                         double sigma_ns) {
    emitter.validate();
    if (sigma_ns < 0.0)
        throw ConfigError("jittered correlation: sigma must be >= 0");
    const double rate = emitter.pump_rate_per_ns + emitter.gamma_per_ns();
    if (sigma_ns == 0.0) return 1.0 - std::exp(-std::abs(tau_ns) * rate);
    // (e^{−Γ|t|} ⊗ N(0,σ))(τ) in closed form.
    const double g = rate, s = sigma_ns, t = tau_ns;
    const double a = 0.5 * std::exp(0.5 * g * g * s * s);
    const double term1 =
        std::exp(-g * t) * std::erfc(-(t - g * s * s) / (s * std::sqrt(2.0)));
    const double term2 =
        std::exp(g * t) * std::erfc((t + g * s * s) / (s * std::sqrt(2.0)));
    return 1.0 - a * (term1 + term2);
}

double fwhm_to_sigma(double fwhm_ns) {
    if (fwhm_ns < 0.0) throw ConfigError("jitter: FWHM must be >= 0");
    return fwhm_ns / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

void Scene::validate() const {
    if (!(signal_cps_at_reference > 0.0))
        throw ConfigError("scene: signal rate must be > 0");
    if (!(background_cps_at_reference >= 0.0))
        throw ConfigError("scene: background rate must be >= 0");
    if (!(reference_qe > 0.0 && reference_qe <= 1.0))
        throw ConfigError("scene: reference qe must lie in (0, 1]");
}

ChannelRates channel_rates(const Scene& scene, const DetectorScenario& det) {
    scene.validate();
    if (!(det.qe > 0.0 && det.qe <= 1.0))
        throw ConfigError("detector scenario '" + det.label +
                          "': qe must lie in (0, 1]");
    if (!(det.dark_cps >= 0.0))
        throw ConfigError("detector scenario '" + det.label +
                          "': dark rate must be >= 0");
    const double scale = det.qe / scene.reference_qe;
    ChannelRates ch;
    ch.signal_cps = 0.5 * scene.signal_cps_at_reference * scale;
    ch.noise_cps = 0.5 * scene.background_cps_at_reference * scale + det.dark_cps;
    return ch;
}

double channel_snr(const ChannelRates& rates) {
    validate_rates(rates, "snr");
    if (!(rates.noise_cps > 0.0)) return std::numeric_limits<double>::infinity();
    return rates.signal_cps / rates.noise_cps;
}

double g2_zero_measured(const EmitterParams& emitter, const Scene& scene,
                        const DetectorScenario& det) {
    const double sigma_det = fwhm_to_sigma(det.jitter_fwhm_ns);
    const double sigma_comb = sigma_det * std::sqrt(2.0); // two detectors
    const double g2_jit = g2_ideal_jittered(emitter, 0.0, sigma_comb);
    const ChannelRates ch = channel_rates(scene, det);
    return background_adjust(g2_jit, ch, ch);
}

std::vector<double> g2_zero_vs_lifetime(const std::vector<double>& lifetimes_ns,
                                        double pump_rate_per_ns,
                                        const Scene& scene,
                                        const DetectorScenario& det) {
    std::vector<double> out;
    out.reserve(lifetimes_ns.size());
    for (double lt : lifetimes_ns) {
        EmitterParams em{lt, pump_rate_per_ns};
        out.push_back(g2_zero_measured(em, scene, det));
    }
    return out;
}

std::vector<double> g2_zero_vs_qe(const std::vector<double>& qes,
                                  const EmitterParams& emitter,
                                  const Scene& scene,
                                  const DetectorScenario& det) {
    std::vector<double> out;
    out.reserve(qes.size());
    for (double qe : qes) {
        DetectorScenario d = det;
        d.qe = qe;
        out.push_back(g2_zero_measured(emitter, scene, d));
    }
    return out;
}

} // namespace sspd::photon
