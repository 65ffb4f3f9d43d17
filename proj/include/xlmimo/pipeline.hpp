#pragma once

#include "xlmimo/baseline.hpp"
#include "xlmimo/scenario_file.hpp"

#include <string_view>

namespace xlmimo {

enum class Method { Decoupled, Baseline };

Method parse_method(std::string_view name);
std::string_view to_string(Method method);

/// Synthesizes the scenario under the file's signal model (noise included).
IfMatrix synthesize_scenario(const ScenarioFile& file);

struct PipelineResult {
    std::vector<SignatureEstimate> signatures;
    std::size_t groups = 0;  ///< first-stage groups, or clusters for the baseline
    std::vector<std::string> diagnostics;
    std::vector<std::pair<std::string, double>> stage_ms;
};

/// Decoupled: narrowband model runs the range-first estimator, the wideband and exact
/// models the angle-first one. Baseline: range-angle map clustering.
PipelineResult run_pipeline(const IfMatrix& y, const ScenarioFile& file, Method method);

}  // namespace xlmimo
