#pragma once

#include <string>
#include <vector>

namespace sspd::detector {

/// Detection efficiency as a function of the instantaneous bias current,
/// ν(I) ∈ [0, 1]: the probability that an arriving photon fires the detector
/// when the wire carries current I.
///
/// Two variants: a smooth sigmoid in I/I_c, or a tabulated curve with linear
/// interpolation (clamped beyond the sampled range). Both are validated on
/// construction: values in [0, 1], non-decreasing, and ν(0) < 1e-6·ν_max.
class EfficiencyCurve {
public:
    /// Logistic curve in x = (I/I_c − center)/width, shifted and rescaled so
    /// that ν(0) is exactly 0 and ν(+∞) is exactly nu_max:
    ///   ν(I) = nu_max · (σ(x) − σ(x0)) / (1 − σ(x0)),  x0 = −center/width.
    static EfficiencyCurve sigmoid(double nu_max, double center_fraction,
                                   double width_fraction);

    /// Piecewise-linear curve through (I/I_c, ν) samples; clamped outside.
    static EfficiencyCurve tabulated(std::vector<double> current_fraction,
                                     std::vector<double> nu);

    /// Efficiency at the given current fraction I/I_c.
    double operator()(double current_over_ic) const;

    double nu_max() const { return nu_max_; }

private:
    EfficiencyCurve() = default;

    bool is_sigmoid_ = true;
    double nu_max_ = 0.0;
    double center_ = 0.0;
    double width_ = 0.0;
    double sigma0_ = 0.0; // σ(x0), the subtracted baseline
    std::vector<double> frac_;
    std::vector<double> nu_;
};

/// Physical detector parameters. Defaults describe the reference device used
/// throughout the toolkit: a nanowire with 29 µA critical current, 1.75 ns
/// current-recovery time constant, 3 ns dead time, 0.1 cps dark rate, 62 ps
/// FWHM timing jitter, and a sigmoidal ν(I) saturating at 0.20.
struct DetectorParams {
    double ic_uA = 29.0;          ///< critical (fully recovered) current
    double tau_ns = 1.75;         ///< current recovery time constant
    double dead_ns = 3.0;         ///< dead time after a fire (ν = 0)
    double dark_cps = 0.1;        ///< intrinsic dark count rate
    double jitter_fwhm_ns = 0.062;///< timing jitter, FWHM
    EfficiencyCurve efficiency = EfficiencyCurve::sigmoid(0.20, 0.74, 0.030);

    /// Throws ConfigError if any parameter is out of range.
    void validate() const;
};

/// How the bias source reacts to the detector's average current draw.
enum class BiasRegime {
    VoltageStabilized, ///< working current I_w fixed regardless of rate
    CurrentStabilized, ///< source holds the time-averaged current at the setpoint
};

/// Wire current at time t after a fire, recovering toward the working
/// current: I(t) = I_w · (1 − e^{−t/τ}).
double current_after_fire(double iw_uA, double t_ns, double tau_ns);

/// Waiting-time distribution between successive fires under Poisson
/// illumination at rate n_in_cps with fixed working current iw_uA.
/// survival[i] is the probability that no fire occurred within t_ns[i] of
/// the previous fire; the fire-time density is its negative derivative.
struct FiringDistribution {
    std::vector<double> t_ns;
    std::vector<double> survival;
    double mean_interval_ns = 0.0;  ///< expected time between fires
    double mean_current_uA = 0.0;   ///< time-weighted average wire current
    double firing_rate_cps = 0.0;   ///< 1 / mean interval (no dark counts)
};

/// Computes the waiting-time distribution by integrating the hazard
/// h(t) = n_in · ν(I(t)) (zero during the dead window) on an adaptive grid,
/// extending until the survival falls below 1e-10 and closing the remainder
/// with the exact constant-hazard tail. Throws NeverFiresError when the
/// hazard is identically zero (ν(I_w) = 0 or n_in = 0).
FiringDistribution firing_distribution(const DetectorParams& params,
                                       double iw_uA, double n_in_cps);

/// Output count rate at fixed working current: 1/mean_interval + dark rate.
double count_rate(const DetectorParams& params, double iw_uA, double n_in_cps);

/// Time-weighted average wire current at fixed working current under Poisson
/// illumination: Ī = ∫ I(t) S(t) dt / ∫ S(t) dt over the inter-fire cycle.
double mean_current(const DetectorParams& params, double iw_uA, double n_in_cps);

/// Self-consistent operating state of a biased detector at one illumination.
struct OperatingPoint {
    double iw_uA = 0.0;        ///< working current actually flowing
    double n_out_cps = 0.0;    ///< output count rate (incl. dark)
    bool latched = false;      ///< no operating current exists; detector stuck
    bool multiple_roots = false;
    std::vector<double> roots_uA; ///< all solutions of Ī(I_w) = bias, ascending
};

/// Solves for the operating point.
/// VoltageStabilized: the working current equals the setpoint; no equation
/// to solve. CurrentStabilized: finds all roots of Ī(I_w) = bias_uA by a
/// sign-change scan on a 1e-3·I_c grid refined by bisection, reports them
/// all, and operates at the largest root; when no root exists the detector
/// is latched and counts only darks.
OperatingPoint operating_point(const DetectorParams& params, BiasRegime regime,
                               double bias_uA, double n_in_cps);

/// One point of an illumination sweep.
struct SweepPoint {
    double n_in_cps = 0.0;
    OperatingPoint op;
};

/// Count rate versus illumination at a fixed bias setpoint.
/// In the current-stabilized regime the sweep follows the operating branch
/// adiabatically: at each illumination it selects the root closest to the
/// previous point's working current, falls to the largest remaining root
/// when that branch has folded away (the characteristic rate step), and
/// reports a latched point (dark counts only) when no root remains.
std::vector<SweepPoint> count_rate_sweep(const DetectorParams& params,
                                         BiasRegime regime, double bias_uA,
                                         const std::vector<double>& n_in_cps);

/// Probability that a photon arriving a time t after a fire is detected,
/// relative to the fully recovered detector: ν(I(t))/ν(I_w); exactly zero
/// inside the dead window. Throws ConfigError if ν(I_w) = 0.
double next_photon_probability(const DetectorParams& params, double iw_uA,
                               double t_ns);

/// Bias fraction below which the detector can never latch: the time-averaged
/// current cannot drop below I_w · (1 − (τ/dead)·(1 − e^{−dead/τ})) even at
/// infinite illumination.
double never_latch_bias_fraction(const DetectorParams& params);

} // namespace sspd::detector
