#include "sspd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "internal_io.hpp"
#include "sspd/errors.hpp"

namespace sspd::mc {

namespace {

double cps_to_per_ns(double cps) { return cps * 1e-9; }

std::string format_ns(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    return buf;
}

/// Merges a dark-count Poisson stream into a detection stream.
void merge_darks(TimestampStream& stream, double dark_cps, std::uint64_t seed,
                 const std::string& label) {
    if (dark_cps <= 0.0 || stream.duration_ns <= 0.0) return;
    TimestampStream darks =
        simulate_poisson(dark_cps, stream.duration_ns, seed, label + "/dark");
    if (darks.t_ns.empty()) return;
    TimestampStream merged = merge_streams(stream, darks);
    stream.t_ns = std::move(merged.t_ns);
}

} // namespace

double TimestampStream::rate_cps() const {
    if (duration_ns <= 0.0) return 0.0;
    return static_cast<double>(t_ns.size()) / (duration_ns * 1e-9);
}

void TimestampStream::validate() const {
    if (!(duration_ns > 0.0))
        throw ConfigError("timestamp stream '" + label + "': duration must be > 0");
    for (std::size_t i = 0; i < t_ns.size(); ++i) {
        if (!(t_ns[i] >= 0.0 && t_ns[i] <= duration_ns))
            throw ConfigError("timestamp stream '" + label + "': event " +
                              std::to_string(i) + " outside [0, duration]");
        if (i > 0 && !(t_ns[i] > t_ns[i - 1]))
            throw ConfigError("timestamp stream '" + label +
                              "': times must be strictly increasing (event " +
                              std::to_string(i) + ")");
    }
}

void write_stream(const TimestampStream& stream, const std::filesystem::path& path) {
    stream.validate();
    std::ostringstream out;
    out << "# duration_ns = " << format_ns(stream.duration_ns) << "\n";
    out << "# seed = " << stream.seed << "\n";
    out << "# label = " << stream.label << "\n";
    for (double t : stream.t_ns) out << format_ns(t) << "\n";
    detail::write_file_atomic(path, out.str());
}

TimestampStream read_stream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stream file: " + path.string());
    TimestampStream s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hdr(line.substr(1));
            std::string key, eq;
            hdr >> key >> eq;
            if (eq == "=") {
                if (key == "duration_ns") hdr >> s.duration_ns;
                else if (key == "seed") hdr >> s.seed;
                else if (key == "label") {
                    std::getline(hdr, s.label);
                    const auto pos = s.label.find_first_not_of(' ');
                    s.label = pos == std::string::npos ? "" : s.label.substr(pos);
                }
            }
            continue;
        }
        std::istringstream row(line);
        double t;
        if (!(row >> t))
            throw ConfigError("stream file " + path.string() + ":" +
                              std::to_string(lineno) + ": expected a time in ns");
        std::string extra;
        if (row >> extra)
            throw ConfigError("stream file " + path.string() + ":" +
                              std::to_string(lineno) + ": one value per line");
        s.t_ns.push_back(t);
    }
    s.validate();
    return s;
}

TimestampStream simulate_poisson(double rate_cps, double duration_ns,
                                 std::uint64_t seed, const std::string& label) {
    if (!(rate_cps > 0.0)) throw ConfigError("simulate_poisson: rate must be > 0");
    if (!(duration_ns > 0.0))
        throw ConfigError("simulate_poisson: duration must be > 0");
    rng::RandomStream rng(seed, label);
    const double rate = cps_to_per_ns(rate_cps);
    TimestampStream s;
    s.duration_ns = duration_ns;
    s.seed = seed;
    s.label = label;
    s.t_ns.reserve(static_cast<std::size_t>(rate * duration_ns * 1.1) + 16);
    double t = rng.exponential(rate);
    while (t <= duration_ns) {
        s.t_ns.push_back(t);
        t += rng.exponential(rate);
    }
    return s;
}

TimestampStream simulate_emitter(const photon::EmitterParams& emitter,
                                 double duration_ns, std::uint64_t seed,
                                 const std::string& label) {
    emitter.validate();
    if (!(duration_ns > 0.0))
        throw ConfigError("simulate_emitter: duration must be > 0");
    rng::RandomStream rng(seed, label);
    const double pump = emitter.pump_rate_per_ns;
    const double gamma = emitter.gamma_per_ns();
    TimestampStream s;
    s.duration_ns = duration_ns;
    s.seed = seed;
    s.label = label;
    s.t_ns.reserve(
        static_cast<std::size_t>(emitter.emission_rate_per_ns() * duration_ns * 1.1) +
        16);
    double t = 0.0;
    while (true) {
        t += rng.exponential(pump);  // waiting in the ground state
        t += rng.exponential(gamma); // excited-state dwell, photon on decay
        if (t > duration_ns) break;
        s.t_ns.push_back(t);
    }
    return s;
}

TimestampStream thin_stream(const TimestampStream& in, double probability,
                            rng::RandomStream& rng) {
    if (!(probability >= 0.0 && probability <= 1.0))
        throw ConfigError("thin_stream: probability must lie in [0, 1]");
    TimestampStream out;
    out.duration_ns = in.duration_ns;
    out.seed = in.seed;
    out.label = in.label;
    out.t_ns.reserve(static_cast<std::size_t>(in.t_ns.size() * probability) + 16);
    for (double t : in.t_ns)
        if (rng.uniform() < probability) out.t_ns.push_back(t);
    return out;
}

TimestampStream merge_streams(const TimestampStream& a, const TimestampStream& b) {
    TimestampStream out;
    out.duration_ns = std::max(a.duration_ns, b.duration_ns);
    out.seed = a.seed;
    out.label = a.label;
    out.t_ns.resize(a.t_ns.size() + b.t_ns.size());
    std::merge(a.t_ns.begin(), a.t_ns.end(), b.t_ns.begin(), b.t_ns.end(),
               out.t_ns.begin());
    return out;
}

TimestampStream add_jitter(const TimestampStream& in, double sigma_ns,
                           rng::RandomStream& rng) {
    if (sigma_ns < 0.0) throw ConfigError("add_jitter: sigma must be >= 0");
    TimestampStream out;
    out.duration_ns = in.duration_ns;
    out.seed = in.seed;
    out.label = in.label;
    if (sigma_ns == 0.0) {
        out.t_ns = in.t_ns;
        return out;
    }
    out.t_ns.reserve(in.t_ns.size());
    for (double t : in.t_ns) {
        const double tj = t + sigma_ns * rng.gaussian();
        if (tj >= 0.0 && tj <= in.duration_ns) out.t_ns.push_back(tj);
    }
    std::sort(out.t_ns.begin(), out.t_ns.end());
    return out;
}

std::pair<TimestampStream, TimestampStream> hbt_split(const TimestampStream& in,
                                                      rng::RandomStream& rng) {
    TimestampStream a, b;
    a.duration_ns = b.duration_ns = in.duration_ns;
    a.seed = b.seed = in.seed;
    a.label = in.label + "/ch1";
    b.label = in.label + "/ch2";
    for (double t : in.t_ns)
        (rng.uniform() < 0.5 ? a : b).t_ns.push_back(t);
    return {std::move(a), std::move(b)};
}

DetectorSimResult simulate_detector_poisson(const detector::DetectorParams& params,
                                            double iw_uA, double n_in_cps,
                                            const StopCondition& stop,
                                            std::uint64_t seed,
                                            const std::string& label) {
    params.validate();
    if (!(iw_uA > 0.0 && iw_uA <= params.ic_uA))
        throw ConfigError("detector simulation: working current must lie in (0, I_c]");
    if (!(n_in_cps > 0.0))
        throw ConfigError("detector simulation: illumination rate must be > 0");
    if (!stop.duration_ns && !stop.max_fires)
        throw ConfigError("detector simulation: need a duration or a fire target");

    const double nu_inf = params.efficiency(iw_uA / params.ic_uA);
    if (!(nu_inf > 0.0))
        throw NeverFiresError("detector never fires: efficiency at working current " +
                              std::to_string(iw_uA) + " uA is zero");
    const double h_inf = cps_to_per_ns(n_in_cps) * nu_inf; // majorant hazard

    rng::RandomStream rng(seed, label);
    TimestampStream s;
    s.seed = seed;
    s.label = label;

    const double t_limit = stop.duration_ns.value_or(
        std::numeric_limits<double>::infinity());
    const std::uint64_t fire_limit =
        stop.max_fires.value_or(std::numeric_limits<std::uint64_t>::max());

    // First fire: the detector starts fully recovered, so the wait is a plain
    // exponential at the full hazard.
    double t = rng.exponential(h_inf);
    while (t <= t_limit && s.t_ns.size() < fire_limit) {
        s.t_ns.push_back(t);
        // Next fire: skip the dead window (no hazard there, memoryless
        // proposals after it), then thin against the recovering efficiency.
        double wait = params.dead_ns;
        while (true) {
            wait += rng.exponential(h_inf);
            const double i_frac =
                detector::current_after_fire(iw_uA, wait, params.tau_ns) /
                params.ic_uA;
            if (rng.uniform() * nu_inf <= params.efficiency(i_frac)) break;
        }
        t += wait;
    }

    s.duration_ns = stop.duration_ns ? *stop.duration_ns
                                     : (s.t_ns.empty() ? 1.0 : s.t_ns.back());
    merge_darks(s, params.dark_cps, seed, label);

    DetectorSimResult res;
    res.duration_ns = s.duration_ns;
    res.mean_rate_cps = s.rate_cps();
    res.detections = std::move(s);
    return res;
}

DetectorSimResult simulate_detector_stream(const detector::DetectorParams& params,
                                           double iw_uA,
                                           const TimestampStream& arrivals,
                                           std::uint64_t seed,
                                           const std::string& label) {
    params.validate();
    arrivals.validate();
    if (!(iw_uA > 0.0 && iw_uA <= params.ic_uA))
        throw ConfigError("detector simulation: working current must lie in (0, I_c]");

    rng::RandomStream rng(seed, label);
    TimestampStream s;
    s.duration_ns = arrivals.duration_ns;
    s.seed = seed;
    s.label = label;

    double last_fire = -std::numeric_limits<double>::infinity();
    for (double t : arrivals.t_ns) {
        const double dt = t - last_fire;
        if (dt < params.dead_ns) continue;
        const double i_frac = std::isinf(dt)
                                  ? iw_uA / params.ic_uA
                                  : detector::current_after_fire(iw_uA, dt,
                                                                 params.tau_ns) /
                                        params.ic_uA;
        if (rng.uniform() < params.efficiency(i_frac)) {
            s.t_ns.push_back(t);
            last_fire = t;
        }
    }
    merge_darks(s, params.dark_cps, seed, label);

    DetectorSimResult res;
    res.duration_ns = s.duration_ns;
    res.mean_rate_cps = s.rate_cps();
    res.detections = std::move(s);
    return res;
}

double CurrentTrace::mean_uA() const {
    if (current_uA.empty()) return 0.0;
    double sum = 0.0;
    for (double c : current_uA) sum += c;
    return sum / static_cast<double>(current_uA.size());
}

CurrentTrace trace_current(const detector::DetectorParams& params, double iw_uA,
                           const TimestampStream& detections, double dt_ns) {
    params.validate();
    detections.validate();
    if (!(dt_ns > 0.0)) throw ConfigError("trace_current: sample interval must be > 0");
    CurrentTrace trace;
    const std::size_t n =
        static_cast<std::size_t>(detections.duration_ns / dt_ns) + 1;
    trace.t_ns.reserve(n);
    trace.current_uA.reserve(n);
    std::size_t next_fire = 0;
    double last_fire = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt_ns;
        while (next_fire < detections.t_ns.size() &&
               detections.t_ns[next_fire] <= t)
            last_fire = detections.t_ns[next_fire++];
        const double since = t - last_fire;
        trace.t_ns.push_back(t);
        trace.current_uA.push_back(
            std::isinf(since) ? iw_uA
                              : detector::current_after_fire(iw_uA, since,
                                                             params.tau_ns));
    }
    return trace;
}

FeedbackSimResult simulate_detector_feedback(const detector::DetectorParams& params,
                                             double bias_uA, double n_in_cps,
                                             double duration_ns,
                                             double feedback_tau_ns,
                                             std::uint64_t seed,
                                             const std::string& label) {
    params.validate();
    if (!(bias_uA > 0.0 && bias_uA <= params.ic_uA))
        throw ConfigError("feedback simulation: bias must lie in (0, I_c]");
    if (!(n_in_cps > 0.0))
        throw ConfigError("feedback simulation: illumination rate must be > 0");
    if (!(duration_ns > 0.0))
        throw ConfigError("feedback simulation: duration must be > 0");
    if (!(feedback_tau_ns > 0.0))
        throw ConfigError("feedback simulation: feedback time constant must be > 0");

    rng::RandomStream rng(seed, label);
    const double rate = cps_to_per_ns(n_in_cps);
    const double tau = params.tau_ns;
    // The steering integrator is slower than the monitor for damping.
    const double steer_tau = 3.0 * feedback_tau_ns;

    TimestampStream s;
    s.duration_ns = duration_ns;
    s.seed = seed;
    s.label = label;

    CurrentTrace trace;
    const double sample_dt = std::max(feedback_tau_ns / 20.0, duration_ns / 200000.0);
    double next_sample = 0.0;

    double iw = bias_uA;   // working current steered by the source
    double ema = bias_uA;  // monitored average of the wire current
    double last_fire = -1e18;
    double mean_acc = 0.0, mean_time = 0.0;

    // Advances the EMA across a gap during which the wire current recovers
    // exponentially (closed-form solution of the monitor ODE).
    const auto advance_ema = [&](double t0, double t1) {
        const double gap = t1 - t0;
        if (gap <= 0.0) return;
        const double since0 = t0 - last_fire;
        const double tf = feedback_tau_ns;
        // I(t) = iw − (iw − I0)·e^{−(t−t0)/τ} with I0 the current at t0.
        const double i0 = iw * (1.0 - std::exp(-std::max(since0, 0.0) / tau));
        const double amp = iw - i0;
        double a_coef;
        if (std::abs(tau - tf) < 1e-9 * tau) {
            a_coef = -amp * gap / tf * std::exp(-gap / tau);
            ema = iw + a_coef + (ema - iw) * std::exp(-gap / tf);
        } else {
            const double a = -amp * tau / (tau - tf);
            ema = iw + a * std::exp(-gap / tau) +
                  (ema - iw - a) * std::exp(-gap / tf);
        }
        mean_acc += 0.5 * (i0 + iw * (1.0 - std::exp(-(t1 - last_fire) / tau))) * gap;
        mean_time += gap;
    };

    double t = 0.0;
    while (t < duration_ns) {
        const double t_next = t + rng.exponential(rate); // next photon arrival
        const double t_step = std::min(t_next, duration_ns);
        // Record trace samples inside the gap.
        while (next_sample <= t_step) {
            const double since = next_sample - last_fire;
            trace.t_ns.push_back(next_sample);
            trace.current_uA.push_back(iw * (1.0 - std::exp(-since / tau)));
            next_sample += sample_dt;
        }
        advance_ema(t, t_step);
        // Source steering: integrate toward the setpoint.
        iw = std::clamp(iw + (bias_uA - ema) * ((t_step - t) / steer_tau), 0.0,
                        params.ic_uA);
        t = t_next;
        if (t > duration_ns) break;
        const double dt = t - last_fire;
        if (dt < params.dead_ns) continue;
        const double i_frac = iw * (1.0 - std::exp(-dt / tau)) / params.ic_uA;
        if (rng.uniform() < params.efficiency(i_frac)) {
            s.t_ns.push_back(t);
            last_fire = t;
        }
    }

    merge_darks(s, params.dark_cps, seed, label);

    FeedbackSimResult res;
    res.final_iw_uA = iw;
    res.mean_current_uA = mean_time > 0.0 ? mean_acc / mean_time : iw;
    res.mean_rate_cps = s.rate_cps();
    res.current = std::move(trace);
    res.detections = std::move(s);
    return res;
}

namespace {

CorrelationHistogram correlate_impl(const TimestampStream& a,
                                    const TimestampStream& b, double bin_ns,
                                    double window_ns, bool exclude_identical,
                                    const CorrelateOptions& options) {
    a.validate();
    b.validate();
    if (!(bin_ns > 0.0)) throw ConfigError("correlate: bin width must be > 0");
    if (!(window_ns >= bin_ns))
        throw ConfigError("correlate: window must be at least one bin");

    const int half_bins = static_cast<int>(std::ceil(window_ns / bin_ns));
    const int nbins = 2 * half_bins;
    const double edge = half_bins * bin_ns;

    CorrelationHistogram h;
    h.bin_start_ns.resize(nbins);
    h.bin_end_ns.resize(nbins);
    h.counts.assign(nbins, 0);
    for (int i = 0; i < nbins; ++i) {
        h.bin_start_ns[i] = -edge + i * bin_ns;
        h.bin_end_ns[i] = h.bin_start_ns[i] + bin_ns;
    }

    std::size_t lo = 0;
    for (std::size_t i = 0; i < a.t_ns.size(); ++i) {
        const double ta = a.t_ns[i];
        while (lo < b.t_ns.size() && b.t_ns[lo] < ta - edge) ++lo;
        for (std::size_t j = lo; j < b.t_ns.size(); ++j) {
            const double dt = b.t_ns[j] - ta;
            if (dt >= edge) break;
            if (exclude_identical && i == j) continue;
            if (options.first_stop_only && dt <= 0.0) continue;
            const int bin = static_cast<int>(std::floor((dt + edge) / bin_ns));
            if (bin >= 0 && bin < nbins) {
                ++h.counts[bin];
                ++h.total_pairs;
            }
            if (options.first_stop_only) break; // only the first partner after ta
        }
    }

    const double duration = std::min(a.duration_ns, b.duration_ns);
    const double ra = static_cast<double>(a.t_ns.size()) / duration;
    const double rb = static_cast<double>(b.t_ns.size()) / duration;
    const double norm = ra * rb * bin_ns * duration;
    h.g2_estimate.resize(nbins);
    for (int i = 0; i < nbins; ++i)
        h.g2_estimate[i] =
            norm > 0.0 ? static_cast<double>(h.counts[i]) / norm : 0.0;
    return h;
}

} // namespace

CorrelationHistogram correlate(const TimestampStream& a, const TimestampStream& b,
                               double bin_ns, double window_ns,
                               const CorrelateOptions& options) {
    return correlate_impl(a, b, bin_ns, window_ns, /*exclude_identical=*/false,
                          options);
}

CorrelationHistogram autocorrelate(const TimestampStream& a, double bin_ns,
                                   double window_ns,
                                   const CorrelateOptions& options) {
    return correlate_impl(a, a, bin_ns, window_ns, /*exclude_identical=*/true,
                          options);
}

void write_histogram(const CorrelationHistogram& hist,
                     const std::filesystem::path& path) {
    std::ostringstream out;
    out << "bin_start_ns,bin_end_ns,counts,g2_estimate\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        out << format_ns(hist.bin_start_ns[i]) << ',' << format_ns(hist.bin_end_ns[i])
            << ',' << hist.counts[i] << ',' << format_ns(hist.g2_estimate[i]) << "\n";
    detail::write_file_atomic(path, out.str());
}

TimestampStream simulate_pulsed_emitter(double lifetime_ns, double period_ns,
                                        std::uint64_t n_pulses,
                                        double detection_probability,
                                        double irf_sigma_ns,
                                        std::uint64_t seed,
                                        const std::string& label) {
    if (!(lifetime_ns > 0.0))
        throw ConfigError("pulsed emitter: lifetime must be > 0");
    if (!(period_ns > 0.0))
        throw ConfigError("pulsed emitter: period must be > 0");
    if (n_pulses == 0) throw ConfigError("pulsed emitter: need at least one pulse");
    if (!(detection_probability > 0.0 && detection_probability <= 1.0))
        throw ConfigError("pulsed emitter: detection probability must lie in (0, 1]");
    if (irf_sigma_ns < 0.0)
        throw ConfigError("pulsed emitter: IRF sigma must be >= 0");

    rng::RandomStream rng(seed, label);
    TimestampStream s;
    s.duration_ns = static_cast<double>(n_pulses) * period_ns;
    s.seed = seed;
    s.label = label;
    s.t_ns.reserve(static_cast<std::size_t>(
                       static_cast<double>(n_pulses) * detection_probability * 1.1) +
                   16);
    for (std::uint64_t p = 0; p < n_pulses; ++p) {
        if (rng.uniform() >= detection_probability) continue;
        double delay = rng.exponential(1.0 / lifetime_ns);
        if (irf_sigma_ns > 0.0) delay += irf_sigma_ns * rng.gaussian();
        // Keep the event inside its own excitation period so the fold is clean.
        if (delay < 0.0 || delay >= period_ns) continue;
        s.t_ns.push_back(static_cast<double>(p) * period_ns + delay);
    }
    return s;
}

DecayHistogram tcspc_histogram(const TimestampStream& stream, double period_ns,
                               double bin_ns, double lifetime_ns) {
    stream.validate();
    if (!(period_ns > 0.0)) throw ConfigError("tcspc: period must be > 0");
    if (!(bin_ns > 0.0 && bin_ns < period_ns))
        throw ConfigError("tcspc: bin width must lie in (0, period)");
    if (!(lifetime_ns > 0.0)) throw ConfigError("tcspc: lifetime must be > 0");
    if (period_ns < 7.0 * lifetime_ns)
        throw ConfigError(
            "tcspc: sync period must be at least 7 lifetimes to make wrap-around "
            "negligible (period " +
            std::to_string(period_ns) + " ns, lifetime " +
            std::to_string(lifetime_ns) + " ns)");

    DecayHistogram h;
    h.bin_ns = bin_ns;
    const std::size_t nbins = static_cast<std::size_t>(std::ceil(period_ns / bin_ns));
    h.bin_start_ns.resize(nbins);
    for (std::size_t i = 0; i < nbins; ++i)
        h.bin_start_ns[i] = static_cast<double>(i) * bin_ns;
    h.counts.assign(nbins, 0);
    for (double t : stream.t_ns) {
        const double delay = std::fmod(t, period_ns);
        const std::size_t bin =
            std::min(static_cast<std::size_t>(delay / bin_ns), nbins - 1);
        ++h.counts[bin];
        ++h.total_counts;
    }
    return h;
}

namespace {

struct LineFit {
    double slope = 0.0, intercept = 0.0;
    std::size_t used = 0;
};

/// Counts-weighted least squares of ln(counts) against bin center over the
/// bins selected by `include`.
template <typename Include>
LineFit weighted_log_fit(const DecayHistogram& hist, Include include) {
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    LineFit fit;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        if (hist.counts[i] == 0 || !include(i)) continue;
        const double center = hist.bin_start_ns[i] + 0.5 * hist.bin_ns;
        const double w = static_cast<double>(hist.counts[i]);
        const double y = std::log(w);
        sw += w;
        swx += w * center;
        swy += w * y;
        swxx += w * center * center;
        swxy += w * center * y;
        ++fit.used;
    }
    if (fit.used < 3) return fit;
    const double det = sw * swxx - swx * swx;
    if (!(std::abs(det) > 0.0)) return LineFit{};
    fit.slope = (sw * swxy - swx * swy) / det;
    fit.intercept = (swy - fit.slope * swx) / sw;
    return fit;
}

} // namespace

DecayFit fit_decay_tail(const DecayHistogram& hist, double tail_start_ns) {
    // Weighted least squares on ln(counts): weights = counts (Poisson ML).
    // ln(N) is a badly biased estimate of ln(lambda) in sparsely populated
    // bins, so bins below a count floor are excluded. Applying the floor to
    // the observed counts would condition boundary-bin inclusion on upward
    // fluctuations and flatten the slope, so a second pass re-selects bins
    // by the counts PREDICTED from the first pass instead.
    const auto center_of = [&hist](std::size_t i) {
        return hist.bin_start_ns[i] + 0.5 * hist.bin_ns;
    };
    constexpr double kFloor = 10.0;
    LineFit pass1 = weighted_log_fit(hist, [&](std::size_t i) {
        return center_of(i) >= tail_start_ns &&
               static_cast<double>(hist.counts[i]) >= kFloor;
    });
    LineFit final_fit;
    if (pass1.used >= 3 && pass1.slope < 0.0) {
        final_fit = weighted_log_fit(hist, [&](std::size_t i) {
            const double c = center_of(i);
            return c >= tail_start_ns &&
                   std::exp(pass1.intercept + pass1.slope * c) >= kFloor;
        });
    }
    if (final_fit.used < 3) {
        // Sparse histogram: fall back to all nonzero bins past the start.
        final_fit = weighted_log_fit(
            hist, [&](std::size_t i) { return center_of(i) >= tail_start_ns; });
    }
    if (final_fit.used < 3)
        throw NumericError("decay tail fit: fewer than 3 usable bins after " +
                           std::to_string(tail_start_ns) + " ns");
    if (!(final_fit.slope < 0.0))
        throw NumericError("decay tail fit: histogram tail is not decaying");
    DecayFit fit;
    fit.tau_ns = -1.0 / final_fit.slope;
    fit.amplitude = std::exp(final_fit.intercept);
    fit.bins_used = final_fit.used;
    return fit;
}

CurrentFit effective_current_fit(const CurrentTrace& trace) {
    const std::size_t n = trace.t_ns.size();
    if (n != trace.current_uA.size() || n < 4)
        throw ConfigError("current fit: need >= 4 samples");

    const double t0 = trace.t_ns.front();
    const double span = trace.t_ns.back() - t0;
    if (!(span > 0.0)) throw ConfigError("current fit: trace has zero time span");

    double ymax = 0.0, ymean = 0.0;
    for (double y : trace.current_uA) {
        ymax = std::max(ymax, std::abs(y));
        ymean += y;
    }
    ymean /= static_cast<double>(n);
    double yvar = 0.0;
    for (double y : trace.current_uA) yvar += (y - ymean) * (y - ymean);
    yvar /= static_cast<double>(n);

    CurrentFit fit;
    if (std::sqrt(yvar) < 1e-9 * std::max(ymax, 1.0)) {
        // Flat trace: the decaying term is unidentifiable.
        fit.level_uA = ymean;
        fit.amplitude_uA = 0.0;
        fit.tau_ns = 0.0;
        fit.degenerate = true;
        return fit;
    }

    // For a trial τ, solve the linear problem y = U + U0·e^{−t/τ} exactly and
    // return the residual sum of squares.
    const auto sse_at = [&](double tau, double* u_out, double* u0_out) {
        double sb = 0, sbb = 0, sy = 0, sby = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double b = std::exp(-(trace.t_ns[i] - t0) / tau);
            const double y = trace.current_uA[i];
            sb += b;
            sbb += b * b;
            sy += y;
            sby += b * y;
        }
        const double m = static_cast<double>(n);
        const double det = m * sbb - sb * sb;
        double u, u0;
        if (std::abs(det) < 1e-30) {
            u = sy / m;
            u0 = 0.0;
        } else {
            u0 = (m * sby - sb * sy) / det;
            u = (sy - u0 * sb) / m;
        }
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = trace.current_uA[i] - u -
                             u0 * std::exp(-(trace.t_ns[i] - t0) / tau);
            sse += r * r;
        }
        if (u_out) *u_out = u;
        if (u0_out) *u0_out = u0;
        return sse;
    };

    // Golden-section search on ln τ.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(span * 1e-4), hi = std::log(span * 10.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = sse_at(std::exp(x1), nullptr, nullptr);
    double f2 = sse_at(std::exp(x2), nullptr, nullptr);
    for (int iter = 0; iter < 120; ++iter) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = sse_at(std::exp(x1), nullptr, nullptr);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = sse_at(std::exp(x2), nullptr, nullptr);
        }
    }
    const double tau = std::exp(0.5 * (lo + hi));
    double u = 0.0, u0 = 0.0;
    sse_at(tau, &u, &u0);
    fit.level_uA = u;
    fit.amplitude_uA = u0;
    fit.tau_ns = tau;
    fit.degenerate = std::abs(u0) < 1e-9 * std::max(ymax, 1.0);
    return fit;
}

} // namespace sspd::mc
