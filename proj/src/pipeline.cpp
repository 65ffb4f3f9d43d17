#include "xlmimo/pipeline.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace xlmimo {

Method parse_method(std::string_view name) {
    if (name == "decoupled") return Method::Decoupled;
    if (name == "baseline") return Method::Baseline;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Method method) {
    return method == Method::Decoupled ? "decoupled" : "baseline";
}

IfMatrix synthesize_scenario(const ScenarioFile& file) {
    return synthesize(file.scenario, file.estimator.model);
}

PipelineResult run_pipeline(const IfMatrix& y, const ScenarioFile& file, Method method) {
    PipelineResult out;
    if (method == Method::Baseline) {
        const auto t0 = std::chrono::steady_clock::now();
        auto b = run_baseline(y, file.estimator.cluster_threshold);
        out.signatures = std::move(b.signatures);
        out.groups = b.clusters.size();
        out.stage_ms.emplace_back(
            "baseline", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
        return out;
    }
    const EstimatorConfig cfg = resolve_estimator_config(file);
    EstimateResult r = file.estimator.model == SignalModel::Narrowband ? estimate_narrowband(y, cfg)
                                                                        : estimate_wideband(y, cfg);
    out.signatures = std::move(r.signatures);
    out.groups = r.group_frequencies.size();
    out.diagnostics = std::move(r.diagnostics);
    out.stage_ms = std::move(r.stage_ms);
    return out;
}

}  // namespace xlmimo
