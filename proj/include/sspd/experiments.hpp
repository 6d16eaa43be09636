#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sspd/config.hpp"

namespace sspd::cli {

inline constexpr const char* kToolVersion = "sspdsim 1.0.0";

/// Result of one experiment run.
struct RunResult {
    std::string kind;
    std::vector<std::filesystem::path> outputs; ///< files written
    std::string summary;                        ///< one-paragraph text summary
};

/// Runs the experiment described by the config into out_dir.
///
/// The config's `kind` key selects one of: tmm-spectrum, count-rate,
/// g2-model, g2-zero-sweep, hbt-sim, lifetime-sim, oracle-check. Every other
/// key must belong to that experiment (unknown keys are hard errors). The
/// optional seed overrides the config's `seed` key. Each run appends one
/// JSON line to out_dir/manifest.jsonl recording the tool version, the
/// effective config and its hash, the seed, wall-clock time, and the list
/// of files written. All file writes are atomic (temp + rename).
RunResult run_experiment(ConfigMap config, const std::filesystem::path& out_dir,
                         std::optional<std::uint64_t> seed_override = {});

/// Named, ready-to-run configurations reproducing the toolkit's reference
/// plots. The text is a complete config file with explanatory comments.
struct Preset {
    std::string name;
    std::string description;
    std::string config_text;
};

/// All built-in presets, in display order.
const std::vector<Preset>& presets();

/// Looks up a preset by name; returns nullptr if no preset has that name.
const Preset* find_preset(const std::string& name);

/// Analytic-vs-simulation consistency suite (the oracle-check experiment).
/// Prints one PASS/FAIL line per check to stdout; returns false if any
/// check failed. `fast` shrinks the Monte Carlo sample sizes.
bool run_oracle_checks(bool fast);

} // namespace sspd::cli
