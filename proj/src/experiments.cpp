#include "sspd/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "internal_io.hpp"
#include "sspd/detector.hpp"
#include "sspd/errors.hpp"
#include "sspd/montecarlo.hpp"
#include "sspd/photon_stats.hpp"
#include "sspd/rng.hpp"
#include "sspd/tmm.hpp"

namespace sspd::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Inclusive linear grid.
std::vector<double> linear_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo))
        throw ConfigError("grid: need max >= min and step > 0");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(lo + i * step);
    return out;
}

/// Inclusive geometric grid with the given number of points.
std::vector<double> geometric_grid(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        throw ConfigError("grid: need 0 < min < max and >= 2 points");
    std::vector<double> out;
    out.reserve(points);
    const double ratio = std::pow(hi / lo, 1.0 / (points - 1));
    double v = lo;
    for (int i = 0; i < points; ++i) {
        out.push_back(i + 1 == points ? hi : v);
        v *= ratio;
    }
    return out;
}

detector::DetectorParams parse_detector(ConfigMap& cfg) {
    detector::DetectorParams p;
    p.ic_uA = cfg.get_double_or("detector.ic_uA", 29.0);
    p.tau_ns = cfg.get_double_or("detector.tau_ns", 1.75);
    p.dead_ns = cfg.get_double_or("detector.dead_ns", 3.0);
    p.dark_cps = cfg.get_double_or("detector.dark_cps", 0.1);
    p.jitter_fwhm_ns = cfg.get_double_or("detector.jitter_fwhm_ns", 0.062);
    const double nu_max = cfg.get_double_or("detector.nu_max", 0.20);
    const double center = cfg.get_double_or("detector.center_fraction", 0.74);
    const double width = cfg.get_double_or("detector.width_fraction", 0.030);
    p.efficiency = detector::EfficiencyCurve::sigmoid(nu_max, center, width);
    p.validate();
    return p;
}

photon::EmitterParams parse_emitter(ConfigMap& cfg) {
    photon::EmitterParams em;
    em.lifetime_ns = cfg.get_double_or("emitter.lifetime_ns", 3.0);
    // Default pump: one tenth of the decay rate.
    em.pump_rate_per_ns =
        cfg.get_double_or("emitter.pump_rate_per_ns", 0.1 / em.lifetime_ns);
    em.validate();
    return em;
}

photon::Scene parse_scene(ConfigMap& cfg) {
    photon::Scene scene;
    scene.signal_cps_at_reference = cfg.get_double_or("scene.signal_cps", 80000.0);
    scene.background_cps_at_reference =
        cfg.get_double_or("scene.background_cps", 800.0);
    scene.reference_qe = cfg.get_double_or("scene.reference_qe", 0.2);
    scene.validate();
    return scene;
}

struct ScenarioDefaults {
    const char* name;
    double qe, dark_cps, jitter_fwhm_ns;
};

/// Reference detector set for correlation sweeps: a conventional
/// single-photon avalanche diode at three dark-count levels, and the
/// nanowire detector at two quantum efficiencies.
constexpr ScenarioDefaults kScenarioDefaults[] = {
    {"apd_real", 0.6, 1500.0, 0.300},
    {"apd_ideal", 0.6, 0.1, 0.300},
    {"apd_datasheet", 0.6, 100.0, 0.300},
    {"sspd", 0.2, 0.1, 0.062},
    {"sspd_high_qe", 0.6, 0.1, 0.062},
};

photon::DetectorScenario parse_named_scenario(ConfigMap& cfg,
                                              const std::string& name) {
    photon::DetectorScenario sc;
    sc.label = name;
    bool found = false;
    for (const auto& d : kScenarioDefaults) {
        if (name == d.name) {
            sc.qe = d.qe;
            sc.dark_cps = d.dark_cps;
            sc.jitter_fwhm_ns = d.jitter_fwhm_ns;
            found = true;
            break;
        }
    }
    const std::string prefix = "scenario." + name + ".";
    if (!found) {
        // A custom scenario must be fully specified.
        sc.qe = cfg.get_double(prefix + "qe");
        sc.dark_cps = cfg.get_double(prefix + "dark_cps");
        sc.jitter_fwhm_ns = cfg.get_double(prefix + "jitter_fwhm_ns");
        return sc;
    }
    sc.qe = cfg.get_double_or(prefix + "qe", sc.qe);
    sc.dark_cps = cfg.get_double_or(prefix + "dark_cps", sc.dark_cps);
    sc.jitter_fwhm_ns = cfg.get_double_or(prefix + "jitter_fwhm_ns", sc.jitter_fwhm_ns);
    return sc;
}

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void append_manifest(const fs::path& out_dir, const std::string& kind,
                     const ConfigMap& cfg, std::uint64_t seed, double wall_ms,
                     const std::vector<fs::path>& outputs,
                     const std::string& summary) {
    nlohmann::json j;
    j["timestamp"] = iso_timestamp();
    j["tool_version"] = kToolVersion;
    j["kind"] = kind;
    j["config_hash"] = cfg.hash();
    j["config"] = cfg.serialize();
    j["seed"] = seed;
    j["wall_ms"] = wall_ms;
    std::vector<std::string> names;
    for (const auto& p : outputs) names.push_back(p.filename().string());
    j["outputs"] = names;
    j["summary"] = summary;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream out(out_dir / "manifest.jsonl", std::ios::app);
    if (!out)
        throw IoError("cannot append to manifest: " +
                      (out_dir / "manifest.jsonl").string());
    out << j.dump() << "\n";
}

// ---------------------------------------------------------------------------
// tmm-spectrum
// ---------------------------------------------------------------------------

RunResult run_tmm_spectrum(ConfigMap& cfg, const fs::path& out_dir) {
    tmm::MeanderStackParams stack_params;
    stack_params.fill_factor = cfg.get_double_or("stack.fill_factor", 0.6);
    stack_params.absorber_thickness_nm =
        cfg.get_double_or("stack.absorber_thickness_nm", 4.0);
    stack_params.spacer_thickness_nm =
        cfg.get_double_or("stack.spacer_thickness_nm", 160.0);

    const double wl_min = cfg.get_double_or("sweep.min_nm", 500.0);
    const double wl_max = cfg.get_double_or("sweep.max_nm", 1000.0);
    const double wl_step = cfg.get_double_or("sweep.step_nm", 2.0);

    const bool do_thickness = cfg.get_bool_or("thickness_sweep.enable", false);
    const double th_min = cfg.get_double_or("thickness_sweep.min_nm", 0.0);
    const double th_max = cfg.get_double_or("thickness_sweep.max_nm", 400.0);
    const double th_step = cfg.get_double_or("thickness_sweep.step_nm", 1.0);
    const double th_wl = cfg.get_double_or("thickness_sweep.wavelength_nm", 700.0);
    cfg.check_all_consumed();

    const tmm::LayerStack stack = tmm::default_meander_stack(stack_params);
    const std::vector<double> wavelengths = linear_grid(wl_min, wl_max, wl_step);
    const auto responses = tmm::spectrum(stack, wavelengths);

    std::ostringstream csv;
    csv << "wavelength_nm,reflectance,transmittance,absorption_absorber,"
           "absorption_spacer,absorption_total\n";
    double peak_wl = wavelengths.front(), peak_abs = -1.0;
    for (const auto& r : responses) {
        csv << fmt(r.wavelength_nm) << ',' << fmt(r.reflectance) << ','
            << fmt(r.transmittance) << ',' << fmt(r.layer_absorption[0]) << ','
            << fmt(r.layer_absorption[1]) << ',' << fmt(r.total_absorption())
            << "\n";
        if (r.layer_absorption[0] > peak_abs) {
            peak_abs = r.layer_absorption[0];
            peak_wl = r.wavelength_nm;
        }
    }

    RunResult res;
    res.kind = "tmm-spectrum";
    const fs::path spec_path = out_dir / "spectrum.csv";
    detail::write_file_atomic(spec_path, csv.str());
    res.outputs.push_back(spec_path);

    if (do_thickness) {
        std::ostringstream tcsv;
        tcsv << "spacer_thickness_nm,absorption_absorber\n";
        tmm::MeanderStackParams sp = stack_params;
        for (double t : linear_grid(th_min, th_max, th_step)) {
            sp.spacer_thickness_nm = t;
            const auto r = tmm::stack_response(tmm::default_meander_stack(sp), th_wl);
            tcsv << fmt(t) << ',' << fmt(r.layer_absorption[0]) << "\n";
        }
        const fs::path tpath = out_dir / "thickness_sweep.csv";
        detail::write_file_atomic(tpath, tcsv.str());
        res.outputs.push_back(tpath);
    }

    res.summary = "absorber absorption peaks at " + fmt_short(peak_wl) + " nm (A = " +
                  fmt_short(peak_abs) + ") over [" + fmt_short(wl_min) + ", " +
                  fmt_short(wl_max) + "] nm";
    return res;
}

// ---------------------------------------------------------------------------
// count-rate
// ---------------------------------------------------------------------------

RunResult run_count_rate(ConfigMap& cfg, const fs::path& out_dir,
                         std::uint64_t seed) {
    const detector::DetectorParams params = parse_detector(cfg);
    const std::string regime_str = cfg.get_string_or("regime", "current");
    detector::BiasRegime regime;
    if (regime_str == "voltage")
        regime = detector::BiasRegime::VoltageStabilized;
    else if (regime_str == "current")
        regime = detector::BiasRegime::CurrentStabilized;
    else
        throw ConfigError("count-rate: regime must be 'voltage' or 'current', got '" +
                          regime_str + "'");

    const double bias_fraction = cfg.get_double_or("bias_fraction", 0.62);
    const double n_min = cfg.get_double_or("sweep.n_in_min_cps", 1e7);
    const double n_max = cfg.get_double_or("sweep.n_in_max_cps", 1e10);
    const int per_decade = static_cast<int>(cfg.get_int_or("sweep.points_per_decade", 10));

    const bool mc_enable = cfg.get_bool_or("mc.enable", false);
    const std::uint64_t mc_fires =
        static_cast<std::uint64_t>(cfg.get_int_or("mc.fires", 200000));
    const double mc_duration = cfg.get_double_or("mc.duration_ns", 1e6);
    const double feedback_tau = cfg.get_double_or("mc.feedback_tau_ns", 1000.0);

    const bool recovery_enable = cfg.get_bool_or("recovery.enable", false);
    const double recovery_max_ns = cfg.get_double_or("recovery.max_ns", 10.0);
    const double recovery_step_ns = cfg.get_double_or("recovery.step_ns", 0.05);
    cfg.check_all_consumed();

    const double bias_uA = bias_fraction * params.ic_uA;
    const int decades = static_cast<int>(
        std::round(std::log10(n_max / n_min) * per_decade));
    const std::vector<double> n_grid =
        decades < 1 ? std::vector<double>{n_min}
                    : geometric_grid(n_min, n_max, decades + 1);

    const auto sweep = detector::count_rate_sweep(params, regime, bias_uA, n_grid);

    std::ostringstream csv;
    csv << "n_in_cps,n_out_cps,iw_uA,iw_fraction,latched,multiple_roots,n_roots";
    if (mc_enable) csv << ",mc_n_out_cps";
    csv << "\n";
    double peak = 0.0;
    int mc_index = 0;
    for (const auto& pt : sweep) {
        csv << fmt(pt.n_in_cps) << ',' << fmt(pt.op.n_out_cps) << ','
            << fmt(pt.op.iw_uA) << ',' << fmt(pt.op.iw_uA / params.ic_uA) << ','
            << (pt.op.latched ? 1 : 0) << ',' << (pt.op.multiple_roots ? 1 : 0)
            << ',' << pt.op.roots_uA.size();
        if (mc_enable) {
            double mc_rate = 0.0;
            const std::string label =
                "count-rate/mc/" + std::to_string(mc_index++);
            if (regime == detector::BiasRegime::VoltageStabilized) {
                mc::StopCondition stop;
                stop.max_fires = mc_fires;
                mc_rate = mc::simulate_detector_poisson(params, bias_uA,
                                                        pt.n_in_cps, stop, seed,
                                                        label)
                              .mean_rate_cps;
            } else if (!pt.op.latched) {
                mc_rate = mc::simulate_detector_feedback(params, bias_uA,
                                                         pt.n_in_cps, mc_duration,
                                                         feedback_tau, seed, label)
                              .mean_rate_cps;
            }
            csv << ',' << fmt(mc_rate);
        }
        csv << "\n";
        peak = std::max(peak, pt.op.n_out_cps);
    }

    RunResult res;
    res.kind = "count-rate";
    const fs::path csv_path = out_dir / "count_rate.csv";
    detail::write_file_atomic(csv_path, csv.str());
    res.outputs.push_back(csv_path);

    if (recovery_enable) {
        std::ostringstream rcsv;
        rcsv << "t_ns,next_photon_probability\n";
        for (double t : linear_grid(0.0, recovery_max_ns, recovery_step_ns))
            rcsv << fmt(t) << ','
                 << fmt(detector::next_photon_probability(params, bias_uA, t))
                 << "\n";
        const fs::path rpath = out_dir / "recovery.csv";
        detail::write_file_atomic(rpath, rcsv.str());
        res.outputs.push_back(rpath);
    }

    std::size_t latched_count = 0;
    for (const auto& pt : sweep)
        if (pt.op.latched) ++latched_count;
    res.summary = regime_str + "-stabilized sweep at " + fmt_short(bias_fraction) +
                  " I_c: peak output " + fmt_short(peak) + " cps, " +
                  std::to_string(latched_count) + "/" +
                  std::to_string(sweep.size()) + " points latched";
    return res;
}

// ---------------------------------------------------------------------------
// g2-model
// ---------------------------------------------------------------------------

RunResult run_g2_model(ConfigMap& cfg, const fs::path& out_dir) {
    const photon::EmitterParams emitter = parse_emitter(cfg);
    const photon::Scene scene = parse_scene(cfg);
    photon::DetectorScenario sc;
    sc.label = cfg.get_string_or("scenario.label", "detector");
    sc.qe = cfg.get_double_or("scenario.qe", 0.2);
    sc.dark_cps = cfg.get_double_or("scenario.dark_cps", 0.1);
    sc.jitter_fwhm_ns = cfg.get_double_or("scenario.jitter_fwhm_ns", 0.062);

    const double window = cfg.get_double_or("window_ns", 30.0);
    const double sigma_comb =
        photon::fwhm_to_sigma(sc.jitter_fwhm_ns) * std::sqrt(2.0);
    const double default_step =
        sigma_comb > 0.0 ? std::min(0.01, sigma_comb / 8.0) : 0.01;
    const double step = cfg.get_double_or("step_ns", default_step);
    cfg.check_all_consumed();

    // Sampled ideal curve, then the jitter and background pipeline.
    photon::G2Curve ideal;
    const int n = static_cast<int>(std::round(2.0 * window / step));
    ideal.tau_ns.reserve(n + 1);
    ideal.g2.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double tau = -window + i * step;
        ideal.tau_ns.push_back(tau);
        ideal.g2.push_back(photon::g2_ideal(emitter, tau));
    }
    const photon::G2Curve jittered = photon::jitter_convolve(ideal, sigma_comb);
    const photon::ChannelRates ch = photon::channel_rates(scene, sc);

    std::ostringstream csv;
    csv << "tau_ns,g2_ideal,g2_jittered,g2_measured\n";
    for (std::size_t i = 0; i < ideal.tau_ns.size(); ++i) {
        const double measured = photon::background_adjust(jittered.g2[i], ch, ch);
        csv << fmt(ideal.tau_ns[i]) << ',' << fmt(ideal.g2[i]) << ','
            << fmt(jittered.g2[i]) << ',' << fmt(measured) << "\n";
    }

    const double g2_zero = photon::g2_zero_measured(emitter, scene, sc);
    const double compensated = photon::background_compensate(g2_zero, ch, ch);

    RunResult res;
    res.kind = "g2-model";
    const fs::path csv_path = out_dir / "g2_model.csv";
    detail::write_file_atomic(csv_path, csv.str());
    res.outputs.push_back(csv_path);
    res.summary = "measured g2(0) = " + fmt_short(g2_zero) +
                  " (channel SNR = " + fmt_short(photon::channel_snr(ch)) +
                  "); background compensation recovers " + fmt_short(compensated);
    return res;
}

// ---------------------------------------------------------------------------
// g2-zero-sweep
// ---------------------------------------------------------------------------

RunResult run_g2_zero_sweep(ConfigMap& cfg, const fs::path& out_dir) {
    const photon::Scene scene = parse_scene(cfg);
    const std::string mode = cfg.get_string_or("mode", "lifetime");
    const std::vector<std::string> names = cfg.get_string_list_or(
        "scenarios",
        {"apd_real", "apd_ideal", "apd_datasheet", "sspd", "sspd_high_qe"});
    std::vector<photon::DetectorScenario> scenarios;
    for (const auto& name : names)
        scenarios.push_back(parse_named_scenario(cfg, name));

    RunResult res;
    res.kind = "g2-zero-sweep";
    std::ostringstream csv;

    if (mode == "lifetime") {
        const double pump = cfg.get_double_or("emitter.pump_rate_per_ns", 1.0 / 30.0);
        std::vector<double> lifetimes = cfg.get_double_list_or(
            "lifetimes_ns", geometric_grid(0.5, 30.0, 31));
        cfg.check_all_consumed();

        csv << "lifetime_ns";
        for (const auto& sc : scenarios) csv << ",g2zero_" << sc.label;
        csv << "\n";
        std::vector<std::vector<double>> cols;
        for (const auto& sc : scenarios)
            cols.push_back(photon::g2_zero_vs_lifetime(lifetimes, pump, scene, sc));
        for (std::size_t i = 0; i < lifetimes.size(); ++i) {
            csv << fmt(lifetimes[i]);
            for (const auto& col : cols) csv << ',' << fmt(col[i]);
            csv << "\n";
        }
        res.summary = "g2(0) vs lifetime over [" + fmt_short(lifetimes.front()) +
                      ", " + fmt_short(lifetimes.back()) + "] ns for " +
                      std::to_string(scenarios.size()) + " detector scenarios";
    } else if (mode == "qe") {
        photon::EmitterParams emitter = parse_emitter(cfg);
        std::vector<double> qes =
            cfg.get_double_list_or("qes", geometric_grid(0.001, 1.0, 31));
        cfg.check_all_consumed();

        csv << "qe";
        for (const auto& sc : scenarios) csv << ",g2zero_" << sc.label;
        csv << "\n";
        std::vector<std::vector<double>> cols;
        for (const auto& sc : scenarios)
            cols.push_back(photon::g2_zero_vs_qe(qes, emitter, scene, sc));
        for (std::size_t i = 0; i < qes.size(); ++i) {
            csv << fmt(qes[i]);
            for (const auto& col : cols) csv << ',' << fmt(col[i]);
            csv << "\n";
        }
        res.summary = "g2(0) vs quantum efficiency at lifetime " +
                      fmt_short(emitter.lifetime_ns) + " ns for " +
                      std::to_string(scenarios.size()) + " detector scenarios";
    } else {
        throw ConfigError("g2-zero-sweep: mode must be 'lifetime' or 'qe', got '" +
                          mode + "'");
    }

    const fs::path csv_path = out_dir / "g2_zero.csv";
    detail::write_file_atomic(csv_path, csv.str());
    res.outputs.push_back(csv_path);
    return res;
}

// ---------------------------------------------------------------------------
// hbt-sim
// ---------------------------------------------------------------------------

RunResult run_hbt_sim(ConfigMap& cfg, const fs::path& out_dir, std::uint64_t seed) {
    const photon::EmitterParams emitter = parse_emitter(cfg);
    const double qe = cfg.get_double_or("channel.qe", 0.33);
    const double dark_cps = cfg.get_double_or("channel.dark_cps", 0.1);
    const double background_cps = cfg.get_double_or("channel.background_cps", 0.0);
    const double jitter_fwhm = cfg.get_double_or("channel.jitter_fwhm_ns", 0.062);
    const double dead_ns = cfg.get_double_or("channel.dead_ns", 3.0);
    const double duration = cfg.get_double_or("duration_ns", 4.5e9);
    const double bin_ns = cfg.get_double_or("correlate.bin_ns", 0.5);
    const double window_ns = cfg.get_double_or("correlate.window_ns", 30.0);
    const bool write_streams = cfg.get_bool_or("streams.write", false);
    cfg.check_all_consumed();

    if (!(qe > 0.0 && qe <= 1.0))
        throw ConfigError("hbt-sim: channel.qe must lie in (0, 1]");
    if (!(dead_ns >= 0.0)) throw ConfigError("hbt-sim: channel.dead_ns must be >= 0");

    // Emission, 50/50 split, per-channel thinning, background, jitter, dead time.
    const mc::TimestampStream emitted =
        mc::simulate_emitter(emitter, duration, seed, "hbt/emitter");
    rng::RandomStream split_rng(seed, "hbt/split");
    auto [raw1, raw2] = mc::hbt_split(emitted, split_rng);

    const double sigma = photon::fwhm_to_sigma(jitter_fwhm);
    const auto build_channel = [&](mc::TimestampStream& raw, int idx) {
        rng::RandomStream ch_rng(seed, "hbt/ch" + std::to_string(idx));
        mc::TimestampStream s = mc::thin_stream(raw, qe, ch_rng);
        if (background_cps > 0.0) {
            const mc::TimestampStream bg = mc::simulate_poisson(
                background_cps, duration, seed, "hbt/bg" + std::to_string(idx));
            s = mc::merge_streams(s, bg);
        }
        if (dark_cps > 0.0) {
            const mc::TimestampStream dk = mc::simulate_poisson(
                dark_cps, duration, seed, "hbt/dark" + std::to_string(idx));
            s = mc::merge_streams(s, dk);
        }
        s = mc::add_jitter(s, sigma, ch_rng);
        if (dead_ns > 0.0) {
            // Absolute dead time: drop events within dead_ns of the last kept.
            std::vector<double> kept;
            kept.reserve(s.t_ns.size());
            double last = -1e18;
            for (double t : s.t_ns) {
                if (t - last >= dead_ns) {
                    kept.push_back(t);
                    last = t;
                }
            }
            s.t_ns = std::move(kept);
        }
        s.label = "hbt/ch" + std::to_string(idx);
        return s;
    };
    mc::TimestampStream ch1 = build_channel(raw1, 1);
    mc::TimestampStream ch2 = build_channel(raw2, 2);

    const mc::CorrelationHistogram hist =
        mc::correlate(ch1, ch2, bin_ns, window_ns);

    // Analytic expectation with the same normalization: noise rates are known
    // inputs; signal is the measured remainder (dead-time losses included).
    const double noise_cps = background_cps + dark_cps;
    photon::ChannelRates r1{ch1.rate_cps() - noise_cps, noise_cps};
    photon::ChannelRates r2{ch2.rate_cps() - noise_cps, noise_cps};
    const double sigma_comb = sigma * std::sqrt(2.0);
    const double norm = ch1.rate_cps() * 1e-9 * ch2.rate_cps() * 1e-9 * bin_ns *
                        std::min(ch1.duration_ns, ch2.duration_ns);

    std::ostringstream csv;
    csv << "bin_center_ns,counts,g2_mc,g2_analytic,z_score\n";
    double max_abs_z = 0.0;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const double center = 0.5 * (hist.bin_start_ns[i] + hist.bin_end_ns[i]);
        const double g2_jit = photon::g2_ideal_jittered(emitter, center, sigma_comb);
        const double g2_an = photon::background_adjust(g2_jit, r1, r2);
        const double expected = g2_an * norm;
        const double sigma_bin = std::sqrt(std::max(expected, 1.0)) / norm;
        const double z = (hist.g2_estimate[i] - g2_an) / sigma_bin;
        max_abs_z = std::max(max_abs_z, std::abs(z));
        csv << fmt(center) << ',' << hist.counts[i] << ',' << fmt(hist.g2_estimate[i])
            << ',' << fmt(g2_an) << ',' << fmt(z) << "\n";
    }

    RunResult res;
    res.kind = "hbt-sim";
    const fs::path hist_path = out_dir / "hbt_histogram.csv";
    mc::write_histogram(hist, hist_path);
    res.outputs.push_back(hist_path);
    const fs::path cmp_path = out_dir / "hbt_comparison.csv";
    detail::write_file_atomic(cmp_path, csv.str());
    res.outputs.push_back(cmp_path);
    if (write_streams) {
        const fs::path p1 = out_dir / "hbt_ch1.txt";
        const fs::path p2 = out_dir / "hbt_ch2.txt";
        mc::write_stream(ch1, p1);
        mc::write_stream(ch2, p2);
        res.outputs.push_back(p1);
        res.outputs.push_back(p2);
    }
    res.summary = "HBT simulation: " + std::to_string(hist.total_pairs) +
                  " coincidences in +-" + fmt_short(window_ns) +
                  " ns, worst per-bin |z| = " + fmt_short(max_abs_z);
    return res;
}

// ---------------------------------------------------------------------------
// lifetime-sim
// ---------------------------------------------------------------------------

RunResult run_lifetime_sim(ConfigMap& cfg, const fs::path& out_dir,
                           std::uint64_t seed) {
    const double lifetime = cfg.get_double_or("pulsed.lifetime_ns", 12.0);
    const double period = cfg.get_double_or("pulsed.period_ns", 100.0);
    const std::uint64_t n_pulses =
        static_cast<std::uint64_t>(cfg.get_int_or("pulsed.n_pulses", 5000000));
    const double pdet = cfg.get_double_or("pulsed.detection_probability", 0.03);
    const double irf_sigma = cfg.get_double_or("pulsed.irf_sigma_ns", 0.03);
    const double bin_ns = cfg.get_double_or("tcspc.bin_ns", 0.2);
    const double tail_start = cfg.get_double_or("fit.tail_start_ns", 2.0 * lifetime);
    cfg.check_all_consumed();

    const mc::TimestampStream events = mc::simulate_pulsed_emitter(
        lifetime, period, n_pulses, pdet, irf_sigma, seed, "lifetime/pulses");
    const mc::DecayHistogram hist =
        mc::tcspc_histogram(events, period, bin_ns, lifetime);
    const mc::DecayFit fit = mc::fit_decay_tail(hist, tail_start);

    std::ostringstream csv;
    csv << "bin_start_ns,counts\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        csv << fmt(hist.bin_start_ns[i]) << ',' << hist.counts[i] << "\n";

    RunResult res;
    res.kind = "lifetime-sim";
    const fs::path csv_path = out_dir / "tcspc.csv";
    detail::write_file_atomic(csv_path, csv.str());
    res.outputs.push_back(csv_path);
    const double rel_err = std::abs(fit.tau_ns - lifetime) / lifetime;
    res.summary = "TCSPC: " + std::to_string(hist.total_counts) +
                  " counts; tail fit tau = " + fmt_short(fit.tau_ns) +
                  " ns (true " + fmt_short(lifetime) + " ns, rel err " +
                  fmt_short(rel_err) + ")";
    return res;
}

// ---------------------------------------------------------------------------
// oracle-check
// ---------------------------------------------------------------------------

RunResult run_oracle_check(ConfigMap& cfg, const fs::path& out_dir) {
    const bool fast = cfg.get_bool_or("fast", false);
    cfg.check_all_consumed();
    const bool ok = run_oracle_checks(fast);
    if (!ok) throw NumericError("oracle-check: one or more checks failed");
    RunResult res;
    res.kind = "oracle-check";
    res.summary = std::string("all oracle checks passed") + (fast ? " (fast)" : "");
    (void)out_dir;
    return res;
}

} // namespace

RunResult run_experiment(ConfigMap config, const fs::path& out_dir,
                         std::optional<std::uint64_t> seed_override) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string kind = config.get_string("kind");
    std::uint64_t seed = static_cast<std::uint64_t>(config.get_int_or("seed", 12345));
    if (seed_override) seed = *seed_override;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + out_dir.string() + ": " +
                      ec.message());

    RunResult res;
    if (kind == "tmm-spectrum")
        res = run_tmm_spectrum(config, out_dir);
    else if (kind == "count-rate")
        res = run_count_rate(config, out_dir, seed);
    else if (kind == "g2-model")
        res = run_g2_model(config, out_dir);
    else if (kind == "g2-zero-sweep")
        res = run_g2_zero_sweep(config, out_dir);
    else if (kind == "hbt-sim")
        res = run_hbt_sim(config, out_dir, seed);
    else if (kind == "lifetime-sim")
        res = run_lifetime_sim(config, out_dir, seed);
    else if (kind == "oracle-check")
        res = run_oracle_check(config, out_dir);
    else
        throw ConfigError(
            "unknown experiment kind '" + kind +
            "' (expected one of: tmm-spectrum, count-rate, g2-model, "
            "g2-zero-sweep, hbt-sim, lifetime-sim, oracle-check)");

    const auto t1 = std::chrono::steady_clock::now();
    const double wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    append_manifest(out_dir, kind, config, seed, wall_ms, res.outputs, res.summary);
    return res;
}

} // namespace sspd::cli
