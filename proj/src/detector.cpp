#include "sspd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "sspd/errors.hpp"

namespace sspd::detector {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr int kLinearPoints = 61;     // grid points across the dead window
constexpr int kGeometricPoints = 4000;// grid points across the recovery tail
constexpr double kGridStartNs = 1e-4; // first step after the dead window
constexpr double kSurvivalFloor = 1e-10;
constexpr double kRootGridStep = 1e-3; // root scan step, in units of I_c

} // namespace

EfficiencyCurve EfficiencyCurve::sigmoid(double nu_max, double center_fraction,
                                         double width_fraction) {
    if (!(nu_max > 0.0 && nu_max <= 1.0))
        throw ConfigError("efficiency sigmoid: nu_max must lie in (0, 1]");
    if (!(width_fraction > 0.0))
        throw ConfigError("efficiency sigmoid: width must be > 0");
    if (!(center_fraction > 0.0))
        throw ConfigError("efficiency sigmoid: center must be > 0");
    EfficiencyCurve c;
    c.is_sigmoid_ = true;
    c.nu_max_ = nu_max;
    c.center_ = center_fraction;
    c.width_ = width_fraction;
    c.sigma0_ = logistic(-center_fraction / width_fraction);
    return c;
}

EfficiencyCurve EfficiencyCurve::tabulated(std::vector<double> current_fraction,
                                           std::vector<double> nu) {
    if (current_fraction.size() != nu.size() || current_fraction.size() < 2)
        throw ConfigError("tabulated efficiency: need >= 2 matching samples");
    for (std::size_t i = 0; i < nu.size(); ++i) {
        if (!(nu[i] >= 0.0 && nu[i] <= 1.0))
            throw ConfigError("tabulated efficiency: values must lie in [0, 1]");
        if (i > 0) {
            if (current_fraction[i] <= current_fraction[i - 1])
                throw ConfigError(
                    "tabulated efficiency: current fractions must be strictly increasing");
            if (nu[i] < nu[i - 1])
                throw ConfigError("tabulated efficiency: must be non-decreasing");
        }
    }
    if (current_fraction.front() < 0.0)
        throw ConfigError("tabulated efficiency: current fractions must be >= 0");
    if (current_fraction.back() > 1.0)
        throw ConfigError(
            "tabulated efficiency: current fractions must be <= 1 (fraction of critical current)");
    const double nu_max = nu.back();
    if (!(nu_max > 0.0))
        throw ConfigError("tabulated efficiency: curve is identically zero");
    // Below the first sample the curve clamps, so ν(0) is the first value.
    if (!(nu.front() < 1e-6 * nu_max))
        throw ConfigError(
            "tabulated efficiency: value at zero current must be < 1e-6 of the maximum");
    EfficiencyCurve c;
    c.is_sigmoid_ = false;
    c.nu_max_ = nu_max;
    c.frac_ = std::move(current_fraction);
    c.nu_ = std::move(nu);
    return c;
}

double EfficiencyCurve::operator()(double current_over_ic) const {
    if (is_sigmoid_) {
        const double x = (current_over_ic - center_) / width_;
        const double v = nu_max_ * (logistic(x) - sigma0_) / (1.0 - sigma0_);
        return std::clamp(v, 0.0, nu_max_);
    }
    if (current_over_ic <= frac_.front()) return nu_.front();
    if (current_over_ic >= frac_.back()) return nu_.back();
    const auto it = std::upper_bound(frac_.begin(), frac_.end(), current_over_ic);
    const std::size_t hi = static_cast<std::size_t>(it - frac_.begin());
    const std::size_t lo = hi - 1;
    const double t = (current_over_ic - frac_[lo]) / (frac_[hi] - frac_[lo]);
    return nu_[lo] + t * (nu_[hi] - nu_[lo]);
}

void DetectorParams::validate() const {
    if (!(ic_uA > 0.0)) throw ConfigError("detector: critical current must be > 0");
    if (!(tau_ns > 0.0)) throw ConfigError("detector: recovery tau must be > 0");
    if (!(dead_ns >= 0.0)) throw ConfigError("detector: dead time must be >= 0");
    if (!(dark_cps >= 0.0)) throw ConfigError("detector: dark rate must be >= 0");
    if (!(jitter_fwhm_ns >= 0.0)) throw ConfigError("detector: jitter must be >= 0");
}

double current_after_fire(double iw_uA, double t_ns, double tau_ns) {
    if (t_ns <= 0.0) return 0.0;
    return iw_uA * (1.0 - std::exp(-t_ns / tau_ns));
}

namespace {

/// Trapezoid quadrature of the waiting-time problem on the standard grid.
/// Returns the full distribution plus the two integrals ∫S dt and ∫I·S dt
/// with the exact constant-hazard tail beyond the grid.
FiringDistribution integrate_cycle(const DetectorParams& p, double iw_uA,
                                   double n_in_cps) {
    p.validate();
    if (!(iw_uA >= 0.0 && iw_uA <= p.ic_uA))
        throw ConfigError("firing_distribution: working current must lie in [0, I_c]");
    if (!(n_in_cps >= 0.0))
        throw ConfigError("firing_distribution: illumination rate must be >= 0");

    const double n_per_ns = n_in_cps * 1e-9;
    const double nu_inf = p.efficiency(iw_uA / p.ic_uA);
    const double h_inf = n_per_ns * nu_inf;
    if (h_inf <= 0.0) {
        std::ostringstream msg;
        msg << "detector never fires: ";
        if (n_in_cps <= 0.0)
            msg << "illumination rate is zero";
        else
            msg << "efficiency at working current " << iw_uA << " uA is zero";
        throw NeverFiresError(msg.str());
    }

    FiringDistribution d;
    const double dead = p.dead_ns;
    // Linear segment across the dead window (survival is exactly 1 there).
    if (dead > 0.0) {
        for (int i = 0; i < kLinearPoints; ++i) {
            d.t_ns.push_back(dead * i / (kLinearPoints - 1));
            d.survival.push_back(1.0);
        }
    } else {
        d.t_ns.push_back(0.0);
        d.survival.push_back(1.0);
    }

    // Geometric segment across the recovery: 40τ covers the hazard's
    // approach to its asymptote to better than 1e-17 relative.
    const double span = 40.0 * p.tau_ns;
    const double ratio = std::pow(span / kGridStartNs, 1.0 / (kGeometricPoints - 1));
    double H = 0.0; // cumulative hazard
    double prev_t = dead;
    double prev_h = 0.0; // hazard at the dead-window edge is ν(I(dead))·n
    {
        const double i_frac = current_after_fire(iw_uA, dead, p.tau_ns) / p.ic_uA;
        prev_h = n_per_ns * p.efficiency(i_frac);
    }
    double offset = kGridStartNs;
    for (int i = 0; i < kGeometricPoints; ++i) {
        const double t = dead + offset;
        const double i_frac = current_after_fire(iw_uA, t, p.tau_ns) / p.ic_uA;
        const double h = n_per_ns * p.efficiency(i_frac);
        H += 0.5 * (h + prev_h) * (t - prev_t);
        d.t_ns.push_back(t);
        d.survival.push_back(std::exp(-H));
        prev_t = t;
        prev_h = h;
        offset *= ratio;
    }

    // ∫ S dt and ∫ I(t)·S dt over the grid.
    double int_s = 0.0, int_is = 0.0;
    for (std::size_t i = 1; i < d.t_ns.size(); ++i) {
        const double dt = d.t_ns[i] - d.t_ns[i - 1];
        const double s0 = d.survival[i - 1], s1 = d.survival[i];
        const double i0 = current_after_fire(iw_uA, d.t_ns[i - 1], p.tau_ns);
        const double i1 = current_after_fire(iw_uA, d.t_ns[i], p.tau_ns);
        int_s += 0.5 * (s0 + s1) * dt;
        int_is += 0.5 * (s0 * i0 + s1 * i1) * dt;
    }

    // Exact tail: beyond the grid the hazard equals h_inf and the current
    // equals I_w up to e^{-40} corrections.
    const double t_end = d.t_ns.back();
    const double s_end = d.survival.back();
    if (s_end > 0.0) {
        int_s += s_end / h_inf;
        int_is += iw_uA * s_end *
                  (1.0 / h_inf -
                   std::exp(-t_end / p.tau_ns) / (h_inf + 1.0 / p.tau_ns));
    }

    d.mean_interval_ns = int_s;
    d.mean_current_uA = int_is / int_s;
    d.firing_rate_cps = 1e9 / int_s;

    if (!std::isfinite(d.mean_interval_ns) || !(d.mean_interval_ns > 0.0))
        throw NumericError("firing_distribution: quadrature failed to converge");
    (void)kSurvivalFloor;
    return d;
}

/// Mean current for the bias solver: where the detector effectively never
/// fires the wire simply sits fully recovered at the working current.
double mean_current_or_recovered(const DetectorParams& p, double iw_uA,
                                 double n_in_cps) {
    try {
        return integrate_cycle(p, iw_uA, n_in_cps).mean_current_uA;
    } catch (const NeverFiresError&) {
        return iw_uA;
    }
}

/// All solutions of mean_current(I_w) = bias on (0, I_c], ascending: a
/// sign-change scan on a 1e-3·I_c grid refined by bisection.
std::vector<double> solve_bias_roots(const DetectorParams& p, double bias_uA,
                                     double n_in_cps) {
    const int n_steps = static_cast<int>(std::round(1.0 / kRootGridStep));
    std::vector<double> roots;
    double prev_i = kRootGridStep * p.ic_uA;
    double prev_f = mean_current_or_recovered(p, prev_i, n_in_cps) - bias_uA;
    for (int j = 2; j <= n_steps; ++j) {
        const double i = (j * kRootGridStep) * p.ic_uA;
        const double f = mean_current_or_recovered(p, i, n_in_cps) - bias_uA;
        if (f == 0.0) {
            roots.push_back(i);
        } else if (prev_f != 0.0 && (f > 0.0) != (prev_f > 0.0)) {
            double lo = prev_i, hi = i, flo = prev_f;
            for (int iter = 0; iter < 60 && (hi - lo) > 1e-9 * p.ic_uA; ++iter) {
                const double mid = 0.5 * (lo + hi);
                const double fm =
                    mean_current_or_recovered(p, mid, n_in_cps) - bias_uA;
                if (fm == 0.0) { lo = hi = mid; break; }
                if ((fm > 0.0) == (flo > 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev_i = i;
        prev_f = f;
    }
    return roots;
}

OperatingPoint point_at_current(const DetectorParams& p, double iw_uA,
                                double n_in_cps) {
    OperatingPoint op;
    op.iw_uA = iw_uA;
    op.n_out_cps = count_rate(p, iw_uA, n_in_cps);
    return op;
}

} // namespace

FiringDistribution firing_distribution(const DetectorParams& params, double iw_uA,
                                       double n_in_cps) {
    return integrate_cycle(params, iw_uA, n_in_cps);
}

double count_rate(const DetectorParams& params, double iw_uA, double n_in_cps) {
    try {
        return integrate_cycle(params, iw_uA, n_in_cps).firing_rate_cps +
               params.dark_cps;
    } catch (const NeverFiresError&) {
        return params.dark_cps;
    }
}

double mean_current(const DetectorParams& params, double iw_uA, double n_in_cps) {
    return integrate_cycle(params, iw_uA, n_in_cps).mean_current_uA;
}

OperatingPoint operating_point(const DetectorParams& params, BiasRegime regime,
                               double bias_uA, double n_in_cps) {
    params.validate();
    if (!(bias_uA >= 0.0 && bias_uA <= params.ic_uA))
        throw ConfigError("operating_point: bias must lie in [0, I_c]");

    if (regime == BiasRegime::VoltageStabilized)
        return point_at_current(params, bias_uA, n_in_cps);

    OperatingPoint op;
    op.roots_uA = solve_bias_roots(params, bias_uA, n_in_cps);
    op.multiple_roots = op.roots_uA.size() > 1;
    if (op.roots_uA.empty()) {
        op.latched = true;
        op.iw_uA = 0.0;
        op.n_out_cps = params.dark_cps;
        return op;
    }
    op.iw_uA = op.roots_uA.back();
    op.n_out_cps = count_rate(params, op.iw_uA, n_in_cps);
    return op;
}

std::vector<SweepPoint> count_rate_sweep(const DetectorParams& params,
                                         BiasRegime regime, double bias_uA,
                                         const std::vector<double>& n_in_cps) {
    params.validate();
    std::vector<SweepPoint> out;
    out.reserve(n_in_cps.size());

    if (regime == BiasRegime::VoltageStabilized) {
        for (double n : n_in_cps)
            out.push_back({n, point_at_current(params, bias_uA, n)});
        return out;
    }

    std::optional<double> branch_iw; // operating current of the followed branch
    for (double n : n_in_cps) {
        SweepPoint pt;
        pt.n_in_cps = n;
        pt.op.roots_uA = solve_bias_roots(params, bias_uA, n);
        pt.op.multiple_roots = pt.op.roots_uA.size() > 1;
        if (pt.op.roots_uA.empty()) {
            pt.op.latched = true;
            pt.op.iw_uA = 0.0;
            pt.op.n_out_cps = params.dark_cps;
            branch_iw.reset();
        } else {
            double chosen = pt.op.roots_uA.back();
            if (branch_iw) {
                // Follow the branch adiabatically: nearest root to the
                // previous operating current.
                double best = std::abs(pt.op.roots_uA.front() - *branch_iw);
                chosen = pt.op.roots_uA.front();
                for (double r : pt.op.roots_uA) {
                    const double dist = std::abs(r - *branch_iw);
                    if (dist < best) {
                        best = dist;
                        chosen = r;
                    }
                }
            }
            pt.op.iw_uA = chosen;
            pt.op.n_out_cps = count_rate(params, chosen, n);
            branch_iw = chosen;
        }
        out.push_back(std::move(pt));
    }
    return out;
}

double next_photon_probability(const DetectorParams& params, double iw_uA,
                               double t_ns) {
    params.validate();
    if (!(iw_uA >= 0.0 && iw_uA <= params.ic_uA))
        throw ConfigError("next_photon_probability: working current must lie in [0, I_c]");
    const double nu_inf = params.efficiency(iw_uA / params.ic_uA);
    if (!(nu_inf > 0.0))
        throw ConfigError(
            "next_photon_probability: efficiency at the working current is zero");
    if (t_ns < params.dead_ns) return 0.0;
    const double i_frac =
        current_after_fire(iw_uA, t_ns, params.tau_ns) / params.ic_uA;
    return params.efficiency(i_frac) / nu_inf;
}

double never_latch_bias_fraction(const DetectorParams& params) {
    params.validate();
    if (params.dead_ns <= 0.0) return 0.0;
    const double r = params.tau_ns / params.dead_ns;
    return 1.0 - r * (1.0 - std::exp(-params.dead_ns / params.tau_ns));
}

} // namespace sspd::detector
