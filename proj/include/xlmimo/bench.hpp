#pragma once

#include "xlmimo/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace xlmimo {

enum class SweepAxis { Sigma, Alpha, Elements, Separation };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

/// A Monte-Carlo sweep over one scenario parameter.
///
/// The separation axis places target `pair_second` at target `pair_first` plus the
/// value along `separation_along` (theta or range); both need normalized locations.
struct SweepSpec {
    ScenarioFile base;
    SweepAxis axis = SweepAxis::Sigma;
    std::vector<double> values;
    int trials = 1;
    Method method = Method::Decoupled;
    std::uint64_t master_seed = 0;
    std::size_t pair_first = 0;
    std::size_t pair_second = 1;
    bool separation_along_theta = true;
};

/// [sweep] section with keys base, axis, values (comma separated), trials, method,
/// model, master_seed, known_k, tol_theta, tol_r, pair (e.g. "0,1"), separation_along.
/// `base` is resolved relative to `base_dir`; env overrides apply to the base scenario.
SweepSpec parse_sweep(std::string_view text, std::string_view source, const std::filesystem::path& base_dir,
                      const EnvOverrides& env = {});
SweepSpec load_sweep(const std::filesystem::path& path, const EnvOverrides& env = {});

struct BenchRow {
    double axis_value = 0.0;
    int trial = 0;
    std::size_t detections = 0;
    std::size_t misses = 0;
    std::size_t false_alarms = 0;
    double rmse_theta = 0.0;
    double rmse_r = 0.0;
    double runtime_ms = 0.0;
};

/// Noise seed of one trial, a pure function of (master seed, axis index, trial).
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t axis_index, int trial);

/// The scenario of one sweep point (before the trial seed is applied).
ScenarioFile sweep_point(const SweepSpec& spec, std::size_t axis_index);

/// Runs every (value, trial) on `threads` workers. Rows come back sorted by
/// (axis index, trial). Runtime is recorded only when `timing` is set.
std::vector<BenchRow> run_sweep(const SweepSpec& spec, int threads = 1, bool timing = false);

std::string format_bench_csv(const std::vector<BenchRow>& rows);

}  // namespace xlmimo
