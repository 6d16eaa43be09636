#pragma once

#include <string>
#include <vector>

namespace sspd::photon {

/// Continuously pumped two-level emitter: pump rate R from ground to excited,
/// radiative decay rate γ = 1/lifetime back down, one photon per decay.
struct EmitterParams {
    double lifetime_ns = 3.0;      ///< 1/γ
    double pump_rate_per_ns = 1.0 / 30.0; ///< R

    double gamma_per_ns() const { return 1.0 / lifetime_ns; }
    /// Steady-state excited-state population R/(R+γ).
    double excited_population() const;
    /// Mean photon emission rate γ·R/(R+γ), in ns⁻¹.
    double emission_rate_per_ns() const;
    void validate() const;
};

/// Excited-state population at time t after preparation in the excited state
/// with the pump off: e^{−γt}.
double excited_population_after_pulse(const EmitterParams& emitter, double t_ns);

/// Ideal second-order correlation of the pumped two-level emitter:
/// g²(τ) = 1 − e^{−|τ|(R+γ)}.
double g2_ideal(const EmitterParams& emitter, double tau_ns);

/// Poissonian rates seen by one detector channel: correlated signal plus
/// uncorrelated noise (optical background and dark counts).
struct ChannelRates {
    double signal_cps = 0.0;
    double noise_cps = 0.0;
    double total_cps() const { return signal_cps + noise_cps; }
};

/// Measured correlation when uncorrelated noise dilutes the signal on both
/// channels:
///   ĝ² = [g²·S₁S₂ + N₁N₂ + N₁S₂ + N₂S₁] / [(S₁+N₁)(S₂+N₂)].
/// ĝ² always lies between g² and 1.
double background_adjust(double g2, const ChannelRates& ch1,
                         const ChannelRates& ch2);

/// Exact inverse of background_adjust: recovers the emitter correlation from
/// a measured value and known channel rates. Throws ConfigError when either
/// channel has zero signal (no signal to compensate).
double background_compensate(double g2_measured, const ChannelRates& ch1,
                             const ChannelRates& ch2);

/// A sampled correlation curve on a uniform delay grid.
struct G2Curve {
    std::vector<double> tau_ns;
    std::vector<double> g2;
};

/// Convolves a curve with a Gaussian timing-jitter kernel of the given
/// standard deviation. The kernel is truncated at ±6σ and renormalized to
/// unit mass; the curve is extended by its edge values. Requires a uniform
/// grid with spacing ≤ σ/4 and throws ConfigError naming the required
/// spacing otherwise. σ = 0 returns the curve unchanged.
G2Curve jitter_convolve(const G2Curve& curve, double sigma_ns);

/// Closed form of the Gaussian-jitter-convolved ideal correlation:
/// (e^{−Γ|τ|} ⊗ N(0,σ))(τ) with Γ = R + γ, evaluated exactly via erfc.
double g2_ideal_jittered(const EmitterParams& emitter, double tau_ns,
                         double sigma_ns);

/// Converts a full-width-at-half-maximum to a Gaussian σ.
double fwhm_to_sigma(double fwhm_ns);

/// One detector in an HBT measurement.
struct DetectorScenario {
    std::string label;
    double qe = 0.2;               ///< quantum efficiency at the operating point
    double dark_cps = 0.1;         ///< intrinsic dark rate, not scaled by qe
    double jitter_fwhm_ns = 0.062; ///< timing jitter FWHM
};

/// Light reaching the detection setup, quoted at a reference quantum
/// efficiency: collected correlated signal and uncorrelated optical
/// background both scale proportionally with the scenario's qe.
struct Scene {
    double signal_cps_at_reference = 80000.0;
    double background_cps_at_reference = 800.0;
    double reference_qe = 0.2;
    void validate() const;
};

/// Per-channel rates for a 50/50 HBT split of the scene onto two identical
/// detectors described by the scenario: signal and optical background halve
/// and scale with qe; the full dark rate adds to each channel's noise.
ChannelRates channel_rates(const Scene& scene, const DetectorScenario& det);

/// Signal-to-noise ratio of one channel (signal over noise rate).
double channel_snr(const ChannelRates& rates);

/// Measured zero-delay correlation for a scene/scenario pair: the ideal
/// emitter correlation is jitter-convolved with the combined two-detector
/// response (σ_comb = √2·σ_det), evaluated at τ = 0, then background-adjusted
/// with the channel rates.
double g2_zero_measured(const EmitterParams& emitter, const Scene& scene,
                        const DetectorScenario& det);

/// g2_zero_measured over a list of emitter lifetimes (pump rate held fixed).
std::vector<double> g2_zero_vs_lifetime(const std::vector<double>& lifetimes_ns,
                                        double pump_rate_per_ns,
                                        const Scene& scene,
                                        const DetectorScenario& det);

/// g2_zero_measured over a list of quantum efficiencies at fixed lifetime;
/// all other scenario fields are taken from `det`.
std::vector<double> g2_zero_vs_qe(const std::vector<double>& qes,
                                  const EmitterParams& emitter,
                                  const Scene& scene,
                                  const DetectorScenario& det);

} // namespace sspd::photon
