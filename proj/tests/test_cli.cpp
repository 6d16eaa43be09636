#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sspd/config.hpp"
#include "sspd/detector.hpp"
#include "sspd/errors.hpp"
#include "sspd/experiments.hpp"

using namespace sspd;
using namespace sspd::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "sspd-cli-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

} // namespace

TEST_CASE("config parsing: comments, whitespace, typed getters") {
    ConfigMap cfg = ConfigMap::from_string(
        "# a comment line\n"
        "\n"
        "kind = tmm-spectrum   # trailing comment\n"
        "  sweep.min_nm=600\n"
        "count = 1e9\n"
        "name = hello world\n"
        "flag = true\n"
        "list = 1, 2.5, 3\n"
        "names = a, b , c\n");
    CHECK(cfg.has("kind"));
    CHECK_FALSE(cfg.has("missing"));
    CHECK(cfg.get_string("kind") == "tmm-spectrum");
    CHECK(cfg.get_double("sweep.min_nm") == doctest::Approx(600.0).epsilon(1e-15));
    CHECK(cfg.get_int("count") == 1000000000);
    CHECK(cfg.get_string("name") == "hello world");
    CHECK(cfg.get_bool_or("flag", false));
    CHECK(cfg.get_bool_or("absent", true));
    const std::vector<double> lst = cfg.get_double_list_or("list", {});
    CHECK(lst == std::vector<double>{1.0, 2.5, 3.0});
    const std::vector<std::string> nms = cfg.get_string_list_or("names", {});
    CHECK(nms == std::vector<std::string>{"a", "b", "c"});
    CHECK_NOTHROW(cfg.check_all_consumed());
}

TEST_CASE("config parsing rejects malformed input") {
    CHECK_THROWS_WITH_AS((void)ConfigMap::from_string("just words\n"),
                         doctest::Contains("expected 'key = value'"), ConfigError);
    CHECK_THROWS_WITH_AS((void)ConfigMap::from_string("a = 1\na = 2\n"),
                         doctest::Contains("duplicate key"), ConfigError);
    CHECK_THROWS_WITH_AS((void)ConfigMap::from_string("key =\n"),
                         doctest::Contains("no value"), ConfigError);
    CHECK_THROWS_WITH_AS((void)ConfigMap::from_string("bad key = 1\n"),
                         doctest::Contains("invalid character"), ConfigError);
    CHECK_THROWS_AS((void)ConfigMap::from_string(" = 1\n"), ConfigError);

    ConfigMap cfg = ConfigMap::from_string("x = notanumber\nn = 1.5\n");
    CHECK_THROWS_WITH_AS((void)cfg.get_double("x"), doctest::Contains("cannot parse"),
                         ConfigError);
    CHECK_THROWS_AS((void)cfg.get_int("n"), ConfigError); // 1.5 is not integral
    CHECK_THROWS_WITH_AS((void)cfg.get_string("nokey"),
                         doctest::Contains("missing required key"), ConfigError);
}

TEST_CASE("unconsumed keys are hard errors that name the key") {
    ConfigMap cfg = ConfigMap::from_string("kind = x\ndetector.typo_ns = 3\n");
    (void)cfg.get_string("kind");
    CHECK_THROWS_WITH_AS(cfg.check_all_consumed(),
                         doctest::Contains("'detector.typo_ns'"), ConfigError);
}

TEST_CASE("overrides replace or add keys") {
    ConfigMap cfg = ConfigMap::from_string("a = 1\n");
    cfg.apply_override("a=2");
    CHECK(cfg.get_int("a") == 2);
    cfg.apply_override("b.c = 3.5");
    CHECK(cfg.get_double("b.c") == doctest::Approx(3.5).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(cfg.apply_override("novalue"),
                         doctest::Contains("key=value"), ConfigError);
    CHECK_THROWS_AS(cfg.apply_override("x="), ConfigError);
}

TEST_CASE("serialization is canonical and round-trips") {
    ConfigMap a = ConfigMap::from_string("beta = 2\nalpha = 1\n");
    ConfigMap b = ConfigMap::from_string("alpha = 1\nbeta = 2\n");
    CHECK(a == b);
    CHECK(a.serialize() == b.serialize());
    CHECK(a.serialize() == "alpha = 1\nbeta = 2\n");
    CHECK(ConfigMap::from_string(a.serialize()) == a);

    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    CHECK(a.hash().find_first_not_of("0123456789abcdef") == std::string::npos);
    ConfigMap c = ConfigMap::from_string("alpha = 1\nbeta = 3\n");
    CHECK(c.hash() != a.hash());
}

TEST_CASE("config files load with file-context errors") {
    const fs::path dir = fresh_dir("config-files");
    {
        std::ofstream out(dir / "good.cfg");
        out << "kind = tmm-spectrum\nsweep.min_nm = 600\n";
    }
    ConfigMap cfg = ConfigMap::from_file(dir / "good.cfg");
    CHECK(cfg.get_string("kind") == "tmm-spectrum");
    CHECK_THROWS_AS((void)ConfigMap::from_file(dir / "missing.cfg"), IoError);
    {
        std::ofstream out(dir / "bad.cfg");
        out << "oops\n";
    }
    CHECK_THROWS_WITH_AS((void)ConfigMap::from_file(dir / "bad.cfg"),
                         doctest::Contains("bad.cfg"), ConfigError);
}

TEST_CASE("presets are listed, unique, parseable, and findable") {
    const auto& all = presets();
    REQUIRE(all.size() >= 8);
    std::set<std::string> names;
    for (const auto& p : all) {
        CHECK(names.insert(p.name).second); // unique
        CHECK_FALSE(p.description.empty());
        ConfigMap cfg = ConfigMap::from_string(p.config_text);
        CHECK(cfg.has("kind"));
        CHECK(find_preset(p.name) == &p);
    }
    CHECK(find_preset("no-such-preset") == nullptr);
}

TEST_CASE("spectrum experiment writes the declared outputs and manifest") {
    const fs::path dir = fresh_dir("run-tmm");
    ConfigMap cfg = ConfigMap::from_string(
        "kind = tmm-spectrum\n"
        "sweep.min_nm = 600\nsweep.max_nm = 700\nsweep.step_nm = 10\n");
    const RunResult res = run_experiment(cfg, dir);
    CHECK(res.kind == "tmm-spectrum");
    REQUIRE_FALSE(res.outputs.empty());
    for (const auto& p : res.outputs) CHECK(fs::exists(p));
    CHECK_FALSE(res.summary.empty());

    const std::string manifest = slurp(dir / "manifest.jsonl");
    const auto rows = lines_of(manifest);
    REQUIRE(rows.size() == 1);
    const nlohmann::json j = nlohmann::json::parse(rows[0]);
    CHECK(j.at("tool_version").get<std::string>() == kToolVersion);
    CHECK(j.at("kind").get<std::string>() == "tmm-spectrum");
    CHECK(j.at("config_hash").get<std::string>().size() == 16);
    CHECK(j.at("seed").get<std::uint64_t>() == 12345); // default seed
    CHECK(j.at("outputs").is_array());
    CHECK(j.at("wall_ms").get<double>() >= 0.0);
    CHECK_FALSE(j.at("summary").get<std::string>().empty());
    CHECK_FALSE(j.at("timestamp").get<std::string>().empty());

    // The spectrum has one row per wavelength plus a header.
    const auto spectrum = lines_of(slurp(dir / "spectrum.csv"));
    CHECK(spectrum.size() == 1 + 11);
}

TEST_CASE("count-rate experiment matches the analytic operating point") {
    const fs::path dir = fresh_dir("run-count-rate");
    ConfigMap cfg = ConfigMap::from_string(
        "kind = count-rate\n"
        "regime = voltage\n"
        "bias_fraction = 0.70\n"
        "sweep.n_in_min_cps = 1e8\nsweep.n_in_max_cps = 1e8\n");
    const RunResult res = run_experiment(cfg, dir);
    REQUIRE_FALSE(res.outputs.empty());
    const auto rows = lines_of(slurp(dir / "count_rate.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].rfind("n_in_cps,n_out_cps,iw_uA,iw_fraction", 0) == 0);
    std::istringstream row(rows[1]);
    std::string n_in_s, n_out_s;
    REQUIRE(static_cast<bool>(std::getline(row, n_in_s, ',')));
    REQUIRE(static_cast<bool>(std::getline(row, n_out_s, ',')));
    detector::DetectorParams p;
    const auto op = detector::operating_point(
        p, detector::BiasRegime::VoltageStabilized, 0.70 * p.ic_uA, 1e8);
    CHECK(std::stod(n_in_s) == doctest::Approx(1e8).epsilon(1e-12));
    CHECK(std::stod(n_out_s) == doctest::Approx(op.n_out_cps).epsilon(1e-12));
}

TEST_CASE("correlation-model experiment produces a bounded sampled curve") {
    const fs::path dir = fresh_dir("run-g2-model");
    ConfigMap cfg = ConfigMap::from_string(
        "kind = g2-model\n"
        "window_ns = 5\n");
    const RunResult res = run_experiment(cfg, dir);
    REQUIRE_FALSE(res.outputs.empty());
    const auto rows = lines_of(slurp(dir / "g2_model.csv"));
    REQUIRE(rows.size() > 100);
    CHECK(rows[0] == "tau_ns,g2_ideal,g2_jittered,g2_measured");
    for (std::size_t i = 1; i < rows.size(); i += 97) {
        std::istringstream row(rows[i]);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        REQUIRE(vals.size() == 4);
        for (std::size_t k = 1; k < 4; ++k) {
            CHECK(vals[k] >= 0.0);
            CHECK(vals[k] <= 1.0 + 1e-12);
        }
        // Noise can only raise an antibunched correlation.
        CHECK(vals[3] >= vals[2] - 1e-12);
    }
}

TEST_CASE("zero-delay sweep experiment emits one column per scenario") {
    const fs::path dir = fresh_dir("run-g2-zero");
    ConfigMap cfg = ConfigMap::from_string(
        "kind = g2-zero-sweep\n"
        "mode = lifetime\n"
        "lifetimes_ns = 1, 3, 10\n"
        "scenarios = sspd, apd_real\n");
    const RunResult res = run_experiment(cfg, dir);
    REQUIRE_FALSE(res.outputs.empty());
    const auto rows = lines_of(slurp(dir / "g2_zero.csv"));
    REQUIRE(rows.size() == 1 + 3);
    CHECK(rows[0].rfind("lifetime_ns,", 0) == 0);
    CHECK(rows[0].find("sspd") != std::string::npos);
    CHECK(rows[0].find("apd_real") != std::string::npos);
}

TEST_CASE("correlation simulation runs end to end in a small window") {
    const fs::path dir = fresh_dir("run-hbt");
    ConfigMap cfg = ConfigMap::from_string(
        "kind = hbt-sim\n"
        "duration_ns = 2e6\n"
        "correlate.bin_ns = 1\n"
        "correlate.window_ns = 10\n"
        "seed = 7\n");
    const RunResult res = run_experiment(cfg, dir);
    CHECK(fs::exists(dir / "hbt_histogram.csv"));
    CHECK(fs::exists(dir / "hbt_comparison.csv"));
    const auto rows = lines_of(slurp(dir / "hbt_histogram.csv"));
    CHECK(rows.size() == 1 + 20); // 2*ceil(10/1) bins
}

TEST_CASE("decay experiment fits the configured lifetime") {
    const fs::path dir = fresh_dir("run-lifetime");
    ConfigMap cfg = ConfigMap::from_string(
        "kind = lifetime-sim\n"
        "pulsed.lifetime_ns = 3\n"
        "pulsed.period_ns = 50\n"
        "pulsed.n_pulses = 200000\n"
        "pulsed.detection_probability = 0.3\n"
        "pulsed.irf_sigma_ns = 0.03\n"
        "tcspc.bin_ns = 0.2\n"
        "fit.tail_start_ns = 6\n"
        "seed = 11\n");
    const RunResult res = run_experiment(cfg, dir);
    CHECK(fs::exists(dir / "tcspc.csv"));
    // The one-line summary reports the fitted decay constant.
    CHECK(res.summary.find("tau") != std::string::npos);
    const auto rows = lines_of(slurp(dir / "tcspc.csv"));
    CHECK(rows.size() > 100);
}

TEST_CASE("unknown kinds and stray keys are rejected") {
    const fs::path dir = fresh_dir("run-errors");
    ConfigMap bad_kind = ConfigMap::from_string("kind = warp-drive\n");
    CHECK_THROWS_AS((void)run_experiment(bad_kind, dir), ConfigError);
    ConfigMap stray = ConfigMap::from_string(
        "kind = tmm-spectrum\nsweep.min_nm = 600\nbogus.key = 1\n");
    CHECK_THROWS_WITH_AS((void)run_experiment(stray, dir),
                         doctest::Contains("'bogus.key'"), ConfigError);
    ConfigMap nokind = ConfigMap::from_string("sweep.min_nm = 600\n");
    CHECK_THROWS_WITH_AS((void)run_experiment(nokind, dir),
                         doctest::Contains("kind"), ConfigError);
}

TEST_CASE("seed control: config seed, override, and reproducibility") {
    const std::string text =
        "kind = lifetime-sim\n"
        "pulsed.lifetime_ns = 3\n"
        "pulsed.period_ns = 50\n"
        "pulsed.n_pulses = 50000\n"
        "pulsed.detection_probability = 0.3\n"
        "tcspc.bin_ns = 0.2\n"
        "seed = 21\n";
    const fs::path d1 = fresh_dir("seed-a");
    const fs::path d2 = fresh_dir("seed-b");
    const fs::path d3 = fresh_dir("seed-c");
    (void)run_experiment(ConfigMap::from_string(text), d1);
    (void)run_experiment(ConfigMap::from_string(text), d2);
    (void)run_experiment(ConfigMap::from_string(text), d3, 99);

    // Same config, same seed: byte-identical data products.
    CHECK(slurp(d1 / "tcspc.csv") == slurp(d2 / "tcspc.csv"));
    // Overridden seed: different draw, different histogram.
    CHECK(slurp(d1 / "tcspc.csv") != slurp(d3 / "tcspc.csv"));

    // The manifest records the effective seed.
    const auto j1 = nlohmann::json::parse(lines_of(slurp(d1 / "manifest.jsonl"))[0]);
    const auto j3 = nlohmann::json::parse(lines_of(slurp(d3 / "manifest.jsonl"))[0]);
    CHECK(j1.at("seed").get<std::uint64_t>() == 21);
    CHECK(j3.at("seed").get<std::uint64_t>() == 99);
}

TEST_CASE("repeated runs append to the manifest") {
    const fs::path dir = fresh_dir("manifest-append");
    ConfigMap cfg = ConfigMap::from_string(
        "kind = tmm-spectrum\n"
        "sweep.min_nm = 650\nsweep.max_nm = 660\nsweep.step_nm = 5\n");
    (void)run_experiment(cfg, dir);
    ConfigMap cfg2 = ConfigMap::from_string(
        "kind = tmm-spectrum\n"
        "sweep.min_nm = 650\nsweep.max_nm = 660\nsweep.step_nm = 5\n");
    (void)run_experiment(cfg2, dir);
    const auto rows = lines_of(slurp(dir / "manifest.jsonl"));
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) CHECK_NOTHROW((void)nlohmann::json::parse(r));
}
