#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sspd/config.hpp"
#include "sspd/errors.hpp"
#include "sspd/experiments.hpp"

namespace {

std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("SSPDSIM_OUT_DIR"); env && *env)
        return env;
    return "out";
}

int execute(sspd::cli::ConfigMap config, const std::vector<std::string>& overrides,
            const std::string& out_dir, std::optional<std::uint64_t> seed) {
    for (const auto& ov : overrides) config.apply_override(ov);
    const auto res = sspd::cli::run_experiment(std::move(config), out_dir, seed);
    std::printf("%s: %s\n", res.kind.c_str(), res.summary.c_str());
    for (const auto& p : res.outputs)
        std::printf("  wrote %s\n", p.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sspdsim: thin-film optics, nanowire detector response, and "
                 "photon-correlation simulation toolkit"};
    app.require_subcommand(1);
    std::printf("%s\n", sspd::cli::kToolVersion);

    std::string config_path, out_dir = default_out_dir().string(), preset_name;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::uint64_t seed_value = 0;
    bool fast = false;

    CLI::App* run = app.add_subcommand("run", "Run an experiment from a config file");
    run->add_option("config", config_path, "Path to a key = value config file")
        ->required();
    run->add_option("--set", overrides, "Override a config entry (key=value)");
    run->add_option("--out", out_dir, "Output directory");
    CLI::Option* run_seed =
        run->add_option("--seed", seed_value, "Override the random seed");

    CLI::App* presets_cmd = app.add_subcommand("presets", "Bundled experiment presets");
    presets_cmd->require_subcommand(1);
    CLI::App* presets_list =
        presets_cmd->add_subcommand("list", "List the bundled presets");
    CLI::App* presets_run =
        presets_cmd->add_subcommand("run", "Run a bundled preset");
    presets_run->add_option("name", preset_name, "Preset name")->required();
    presets_run->add_option("--set", overrides, "Override a config entry (key=value)");
    presets_run->add_option("--out", out_dir, "Output directory");
    CLI::Option* preset_seed =
        presets_run->add_option("--seed", seed_value, "Override the random seed");

    CLI::App* oracles = app.add_subcommand(
        "check-oracles", "Run the built-in cross-validation checks");
    oracles->add_flag("--fast", fast, "Smaller sample sizes");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (run_seed->count()) seed = seed_value;
            return execute(sspd::cli::ConfigMap::from_file(config_path), overrides,
                           out_dir, seed);
        }
        if (presets_list->parsed()) {
            for (const auto& p : sspd::cli::presets())
                std::printf("%-8s %s\n", p.name.c_str(), p.description.c_str());
            return 0;
        }
        if (presets_run->parsed()) {
            const sspd::cli::Preset* p = sspd::cli::find_preset(preset_name);
            if (!p) {
                std::fprintf(stderr, "error: unknown preset '%s' (try 'presets list')\n",
                             preset_name.c_str());
                return 2;
            }
            if (preset_seed->count()) seed = seed_value;
            return execute(sspd::cli::ConfigMap::from_string(p->config_text),
                           overrides, out_dir, seed);
        }
        if (oracles->parsed())
            return sspd::cli::run_oracle_checks(fast) ? 0 : 3;
    } catch (const sspd::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const sspd::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const sspd::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
