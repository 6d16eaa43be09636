#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sspd/detector.hpp"
#include "sspd/photon_stats.hpp"
#include "sspd/rng.hpp"

namespace sspd::mc {

/// A strictly increasing sequence of event times in nanoseconds, tagged with
/// the observation window and the RNG provenance that produced it.
struct TimestampStream {
    std::vector<double> t_ns;
    double duration_ns = 0.0;
    std::uint64_t seed = 0;
    std::string label;

    std::size_t size() const { return t_ns.size(); }
    /// Mean event rate in counts per second.
    double rate_cps() const;
    /// Throws ConfigError unless times are strictly increasing within
    /// [0, duration_ns].
    void validate() const;
};

/// Writes a stream as '#'-prefixed header lines (duration_ns, seed, label)
/// followed by one decimal nanosecond value per line. Atomic (temp+rename).
void write_stream(const TimestampStream& stream, const std::filesystem::path& path);

/// Parses the write_stream format and validates the result.
TimestampStream read_stream(const std::filesystem::path& path);

/// Homogeneous Poisson arrivals at the given rate over [0, duration].
TimestampStream simulate_poisson(double rate_cps, double duration_ns,
                                 std::uint64_t seed, const std::string& label);

/// Photon emission times of the pumped two-level emitter: alternating
/// exponential waits (pump R, then decay γ), one photon per decay.
TimestampStream simulate_emitter(const photon::EmitterParams& emitter,
                                 double duration_ns, std::uint64_t seed,
                                 const std::string& label);

/// Keeps each event independently with the given probability.
TimestampStream thin_stream(const TimestampStream& in, double probability,
                            rng::RandomStream& rng);

/// Sorted union of two streams over the longer duration.
TimestampStream merge_streams(const TimestampStream& a, const TimestampStream& b);

/// Adds Gaussian timing jitter (standard deviation sigma_ns) to every event,
/// drops events jittered outside the window, and re-sorts.
TimestampStream add_jitter(const TimestampStream& in, double sigma_ns,
                           rng::RandomStream& rng);

/// Splits a stream 50/50 at random (an ideal HBT beamsplitter).
std::pair<TimestampStream, TimestampStream> hbt_split(const TimestampStream& in,
                                                      rng::RandomStream& rng);

/// Result of a detector simulation.
struct DetectorSimResult {
    TimestampStream detections;
    double duration_ns = 0.0;
    double mean_rate_cps = 0.0; ///< detections / duration, darks included
};

/// Stop condition for open-ended detector simulations: runs until the
/// duration elapses or the fire count is reached, whichever is set.
struct StopCondition {
    std::optional<double> duration_ns;
    std::optional<std::uint64_t> max_fires;
};

/// Simulates a voltage-stabilized detector under Poisson illumination by
/// exact thinning: after each fire the dead window is skipped outright
/// (memorylessness), waits are proposed at the majorant rate ν(I_w)·n_in and
/// accepted with probability ν(I(t))/ν(I_w). Statistically exact and O(1)
/// proposals per fire at every rate. Dark counts are merged in.
DetectorSimResult simulate_detector_poisson(const detector::DetectorParams& params,
                                            double iw_uA, double n_in_cps,
                                            const StopCondition& stop,
                                            std::uint64_t seed,
                                            const std::string& label);

/// Walks an explicit arrival stream through the detector: arrivals in the
/// dead window are lost; later ones fire with probability ν(I(Δt)) where Δt
/// is the time since the previous fire. Dark counts are merged in.
DetectorSimResult simulate_detector_stream(const detector::DetectorParams& params,
                                           double iw_uA,
                                           const TimestampStream& arrivals,
                                           std::uint64_t seed,
                                           const std::string& label);

/// Uniformly sampled wire current.
struct CurrentTrace {
    std::vector<double> t_ns;
    std::vector<double> current_uA;
    double mean_uA() const;
};

/// Samples I(t) = I_w·(1 − e^{−(t−t_fire)/τ}) between the fires of a
/// detection stream at the given sampling interval.
CurrentTrace trace_current(const detector::DetectorParams& params, double iw_uA,
                           const TimestampStream& detections, double dt_ns);

/// Result of a current-stabilized (feedback) detector simulation.
struct FeedbackSimResult {
    TimestampStream detections;
    CurrentTrace current;       ///< sampled wire current
    double final_iw_uA = 0.0;   ///< working current at the end of the run
    double mean_current_uA = 0.0;
    double mean_rate_cps = 0.0;
};

/// Simulates a current-stabilized detector: an exponential-moving-average
/// monitor of the wire current (time constant feedback_tau_ns, default 1 µs)
/// steers the working current toward the setpoint between events.
FeedbackSimResult simulate_detector_feedback(const detector::DetectorParams& params,
                                             double bias_uA, double n_in_cps,
                                             double duration_ns,
                                             double feedback_tau_ns,
                                             std::uint64_t seed,
                                             const std::string& label);

/// Correlation histogram over signed delays, with the normalized estimate
/// ĝ²(τ) = counts / (rate₁ · rate₂ · bin · duration).
struct CorrelationHistogram {
    std::vector<double> bin_start_ns;
    std::vector<double> bin_end_ns;
    std::vector<std::uint64_t> counts;
    std::vector<double> g2_estimate;
    std::uint64_t total_pairs = 0;
};

struct CorrelateOptions {
    /// Take only the first partner event after each reference event
    /// (classic start-stop estimator) instead of all pairs in the window.
    bool first_stop_only = false;
};

/// Histograms delays t_b − t_a for all pairs within ±window of each other
/// (two-pointer sweep). Bin count is 2·ceil(window/bin), centered on zero.
CorrelationHistogram correlate(const TimestampStream& a, const TimestampStream& b,
                               double bin_ns, double window_ns,
                               const CorrelateOptions& options = {});

/// Autocorrelation of one stream; pairs of an event with itself (zero lag)
/// are excluded.
CorrelationHistogram autocorrelate(const TimestampStream& a, double bin_ns,
                                   double window_ns,
                                   const CorrelateOptions& options = {});

/// Writes "bin_start_ns,bin_end_ns,counts,g2_estimate" CSV. Atomic.
void write_histogram(const CorrelationHistogram& hist,
                     const std::filesystem::path& path);

/// Detected photon times from a pulsed-excitation run: every period the
/// emitter is re-excited and, with probability detection_probability, yields
/// one detected photon delayed by an exponential decay of the given
/// lifetime (plus optional Gaussian IRF jitter).
TimestampStream simulate_pulsed_emitter(double lifetime_ns, double period_ns,
                                        std::uint64_t n_pulses,
                                        double detection_probability,
                                        double irf_sigma_ns,
                                        std::uint64_t seed,
                                        const std::string& label);

/// Time-correlated counting histogram: event times folded by the sync period.
struct DecayHistogram {
    std::vector<double> bin_start_ns;
    std::vector<std::uint64_t> counts;
    double bin_ns = 0.0;
    std::uint64_t total_counts = 0;
};

/// Folds a stream by the sync period into a delay histogram. Requires
/// period ≥ 7 lifetimes so wrap-around is negligible (ConfigError otherwise).
DecayHistogram tcspc_histogram(const TimestampStream& stream, double period_ns,
                               double bin_ns, double lifetime_ns);

/// Exponential-tail fit of a decay histogram.
struct DecayFit {
    double tau_ns = 0.0;
    double amplitude = 0.0;   ///< fitted counts per bin at t = 0
    std::size_t bins_used = 0;
};

/// Fits ln(counts) = ln(A) − t/τ on bins starting at tail_start_ns,
/// weighted by counts (Poisson maximum-likelihood weights). Sparse bins are
/// excluded — ln(counts) is badly biased below ~10 counts — with the floor
/// applied to the counts predicted by a first fitting pass, so that bin
/// selection does not condition on the fluctuations being fitted. Falls
/// back to all nonzero bins when the histogram is too sparse for the floor.
/// Throws NumericError if fewer than 3 usable bins remain.
DecayFit fit_decay_tail(const DecayHistogram& hist, double tail_start_ns);

/// Least-squares fit of a current recovery trace to U + U₀·e^{−t/τ}
/// (golden-section search on τ, closed-form linear solve for U, U₀).
struct CurrentFit {
    double level_uA = 0.0;      ///< U: the settled level
    double amplitude_uA = 0.0;  ///< U₀: the decaying amplitude
    double tau_ns = 0.0;
    bool degenerate = false;    ///< trace is flat; τ is meaningless
};

CurrentFit effective_current_fit(const CurrentTrace& trace);

} // namespace sspd::mc
