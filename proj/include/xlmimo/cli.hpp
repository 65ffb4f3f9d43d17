#pragma once

#include "xlmimo/bench.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace xlmimo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

struct InputSpec {
    std::optional<std::filesystem::path> scenario;
    std::optional<std::filesystem::path> matrix;  ///< CSV written by synth; params from `<matrix>.meta`
    std::optional<SignalModel> model;
    std::optional<std::uint64_t> seed;
    EnvOverrides env;
};

/// Writes `out` (m,n,re,im) and `out.meta` (the effective scenario).
void cmd_synth(const InputSpec& input, const std::filesystem::path& out, std::ostream& log);

/// Writes a magnitude map; range_angle maps also report the cluster count.
void cmd_map(const InputSpec& input, MapView view, const std::filesystem::path& out, std::ostream& log);

/// Writes the signatures CSV to `out` and the run report to `out.report.json`.
void cmd_estimate(const InputSpec& input, Method method, const std::filesystem::path& out, bool timing,
                  std::ostream& log);

struct BenchOptions {
    std::optional<Method> method;
    std::optional<std::uint64_t> master_seed;
    int threads = 1;
    bool timing = false;
    EnvOverrides env;
};

void cmd_bench(const std::filesystem::path& sweep, const std::filesystem::path& out, const BenchOptions& options,
               std::ostream& log);

/// Command-line entry point. Returns 0 on success, 2 on parse or configuration
/// errors and 3 on I/O errors. Scenario keys read XLMIMO_<SECTION>_<KEY> overrides
/// from the process environment.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xlmimo
