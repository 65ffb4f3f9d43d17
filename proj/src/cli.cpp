#include "xlmimo/cli.hpp"

#include "xlmimo/csv_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ostream>

namespace xlmimo {

namespace {

using ordered_json = nlohmann::ordered_json;

std::filesystem::path with_suffix(const std::filesystem::path& p, const std::string& suffix) {
    return std::filesystem::path(p.string() + suffix);
}

ScenarioFile effective_scenario(const InputSpec& input) {
    ScenarioFile f;
    if (input.matrix && !std::filesystem::is_regular_file(*input.matrix))
        throw IoError("cannot open '" + input.matrix->string() + "' for reading");
    if (input.scenario) {
        f = load_scenario(*input.scenario, input.env);
    } else if (input.matrix) {
        const auto meta = with_suffix(*input.matrix, ".meta");
        if (!std::filesystem::exists(meta))
            throw ConfigError(input.matrix->string(), 0, "matrix",
                              "no radar parameters: pass --scenario or keep the '" + meta.string() + "' sidecar");
        f = load_scenario(meta, input.env);
    } else {
        throw ConfigError("command line", 0, "scenario", "one of --scenario or --matrix is required");
    }
    if (input.model) f.estimator.model = *input.model;
    if (input.seed) f.scenario.seed = *input.seed;
    return f;
}

IfMatrix acquire_matrix(const InputSpec& input, const ScenarioFile& f) {
    if (!input.matrix) return synthesize_scenario(f);
    IfMatrix y;
    y.params = f.scenario.params;
    y.data = parse_matrix_csv(read_text_file(*input.matrix), input.matrix->string());
    if (y.data.rows() != y.params.elements || y.data.cols() != y.params.samples)
        throw ConfigError(input.matrix->string(), 0, "matrix",
                          "matrix is " + std::to_string(y.data.rows()) + "x" + std::to_string(y.data.cols()) +
                              " but the parameters say M=" + std::to_string(y.params.elements) +
                              ", N=" + std::to_string(y.params.samples));
    return y;
}

ordered_json number_or_null(double v) {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

}  // namespace

void cmd_synth(const InputSpec& input, const std::filesystem::path& out, std::ostream& log) {
    if (input.matrix) throw ConfigError("command line", 0, "matrix", "synth takes --scenario, not --matrix");
    const ScenarioFile f = effective_scenario(input);
    const IfMatrix y = synthesize_scenario(f);
    write_text_file(out, format_matrix_csv(y.data));
    write_text_file(with_suffix(out, ".meta"), format_scenario(f));
    log << "synth: " << to_string(f.estimator.model) << " " << y.elements() << "x" << y.samples() << " -> "
        << out.string() << "\n";
}

void cmd_map(const InputSpec& input, MapView view, const std::filesystem::path& out, std::ostream& log) {
    const ScenarioFile f = effective_scenario(input);
    const IfMatrix y = acquire_matrix(input, f);
    const MapGrid map = make_map(y.data, view);
    std::vector<std::string> header{"view=" + std::string(to_string(view)),
                                    "model=" + std::string(to_string(f.estimator.model))};
    std::string summary;
    if (view == MapView::RangeAngle) {
        const auto clusters = detect_clusters(map, f.estimator.cluster_threshold);
        header.push_back("clusters=" + std::to_string(clusters.size()) +
                         " threshold=" + format_number(f.estimator.cluster_threshold));
        summary = ", " + std::to_string(clusters.size()) + " clusters";
    }
    write_text_file(out, format_map_csv(map, header));
    log << "map: " << to_string(view) << " " << map.rows() << "x" << map.cols() << summary << " -> " << out.string()
        << "\n";
}

void cmd_estimate(const InputSpec& input, Method method, const std::filesystem::path& out, bool timing,
                  std::ostream& log) {
    const ScenarioFile f = effective_scenario(input);
    const auto t0 = std::chrono::steady_clock::now();
    const IfMatrix y = acquire_matrix(input, f);
    const auto t1 = std::chrono::steady_clock::now();
    const PipelineResult r = run_pipeline(y, f, method);
    const auto t2 = std::chrono::steady_clock::now();

    ordered_json report;
    report["method"] = std::string(to_string(method));
    report["model"] = std::string(to_string(f.estimator.model));
    report["source"] = input.matrix ? "matrix" : "scenario";
    report["groups"] = r.groups;
    ordered_json sigs = ordered_json::array();
    for (const auto& s : r.signatures)
        sigs.push_back({{"group_id", s.group_id},
                        {"omega_theta", s.omega_theta},
                        {"omega_r", s.omega_r},
                        {"amp_re", s.amplitude.real()},
                        {"amp_im", s.amplitude.imag()}});
    report["signatures"] = sigs;

    std::string match_line;
    if (!f.scenario.targets.empty()) {
        const auto truth = resolve_all(f.scenario);
        const MatchReport m = match_signatures(truth, r.signatures, f.estimator.tol_theta, f.estimator.tol_r);
        ordered_json pairs = ordered_json::array();
        for (const auto& p : m.pairs)
            pairs.push_back(
                {{"truth", p.truth}, {"estimate", p.estimate}, {"err_theta", p.err_theta}, {"err_r", p.err_r}});
        report["match"] = {{"tol_theta", f.estimator.tol_theta},
                           {"tol_r", f.estimator.tol_r},
                           {"matched", m.matched()},
                           {"misses", m.misses.size()},
                           {"false_alarms", m.false_alarms.size()},
                           {"rmse_theta", number_or_null(m.rmse_theta)},
                           {"rmse_r", number_or_null(m.rmse_r)},
                           {"pairs", pairs}};
        match_line = ", matched " + std::to_string(m.matched()) + "/" + std::to_string(truth.size()) + ", " +
                     std::to_string(m.false_alarms.size()) + " false alarms";
    }
    report["diagnostics"] = r.diagnostics;
    if (timing) {
        ordered_json t;
        t["acquire"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        for (const auto& [name, ms] : r.stage_ms) t[name] = ms;
        t["total"] = std::chrono::duration<double, std::milli>(t2 - t0).count();
        report["timing_ms"] = t;
    }
    report["config"] = format_scenario(f);

    write_text_file(out, format_signatures_csv(r.signatures));
    write_text_file(with_suffix(out, ".report.json"), report.dump(2) + "\n");

    log << "estimate: " << to_string(method) << ", " << r.signatures.size() << " signatures in " << r.groups
        << (method == Method::Baseline ? " clusters" : " groups") << match_line << "\n";
    for (const auto& d : r.diagnostics) log << "  note: " << d << "\n";
    if (timing) {
        for (const auto& [name, ms] : r.stage_ms) log << "  " << name << ": " << ms << " ms\n";
        log << "  total: " << std::chrono::duration<double, std::milli>(t2 - t0).count() << " ms\n";
    }
}

void cmd_bench(const std::filesystem::path& sweep, const std::filesystem::path& out, const BenchOptions& options,
               std::ostream& log) {
    SweepSpec spec = load_sweep(sweep, options.env);
    if (options.method) spec.method = *options.method;
    if (options.master_seed) spec.master_seed = *options.master_seed;
    const auto rows = run_sweep(spec, options.threads, options.timing);
    write_text_file(out, format_bench_csv(rows));
    log << "bench: " << to_string(spec.axis) << " x " << spec.values.size() << " values x " << spec.trials
        << " trials (" << to_string(spec.method) << ") -> " << out.string() << "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"MIMO-FMCW IF-signal simulator and decoupled signature estimator", "xlmimo"};
    app.require_subcommand(1);

    std::string scenario;
    std::string matrix;
    std::string model;
    std::string method = "decoupled";
    std::string view = "range_angle";
    std::string out_path;
    std::string sweep;
    std::uint64_t seed = 0;
    int threads = 1;
    bool timing = false;

    auto* synth = app.add_subcommand("synth", "Synthesize an IF matrix as CSV");
    synth->add_option("--scenario", scenario, "Scenario file")->required();
    synth->add_option("--model", model, "narrowband | wideband | exact (overrides the file)");
    synth->add_option("--seed", seed, "Noise seed (overrides the file)");
    synth->add_option("--out", out_path, "Output CSV")->required();

    auto* map = app.add_subcommand("map", "Write a distortion-view magnitude map as CSV");
    auto* map_scn = map->add_option("--scenario", scenario, "Scenario file");
    map->add_option("--matrix", matrix, "Matrix CSV from synth")->excludes(map_scn);
    map->add_option("--model", model, "narrowband | wideband | exact");
    map->add_option("--seed", seed, "Noise seed");
    map->add_option("--view", view, "range_angle | angle_time | range_antenna");
    map->add_option("--out", out_path, "Output CSV")->required();

    auto* est = app.add_subcommand("estimate", "Recover target signatures");
    est->add_option("--scenario", scenario, "Scenario file (truth and estimator settings)");
    est->add_option("--matrix", matrix, "Matrix CSV from synth");
    est->add_option("--model", model, "narrowband | wideband | exact");
    est->add_option("--method", method, "decoupled | baseline");
    est->add_option("--seed", seed, "Noise seed");
    est->add_option("--out", out_path, "Signatures CSV")->required();
    est->add_flag("--timing", timing, "Report wall-clock time per stage");

    auto* bench = app.add_subcommand("bench", "Monte-Carlo sweep");
    bench->add_option("--sweep", sweep, "Sweep file")->required();
    bench->add_option("--method", method, "decoupled | baseline (overrides the sweep)");
    bench->add_option("--seed", seed, "Master seed (overrides the sweep)");
    bench->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));
    bench->add_option("--out", out_path, "Output CSV")->required();
    bench->add_flag("--timing", timing, "Record runtime_ms (otherwise 0 for reproducible files)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        InputSpec input;
        input.env = environment_overrides();
        if (!scenario.empty()) input.scenario = scenario;
        if (!matrix.empty()) input.matrix = matrix;
        if (!model.empty()) input.model = parse_signal_model(model);
        if (auto* sub = app.get_subcommands().front(); sub->count("--seed") > 0) input.seed = seed;

        if (synth->parsed()) {
            cmd_synth(input, out_path, out);
        } else if (map->parsed()) {
            cmd_map(input, parse_map_view(view), out_path, out);
        } else if (est->parsed()) {
            cmd_estimate(input, parse_method(method), out_path, timing, out);
        } else if (bench->parsed()) {
            BenchOptions opt;
            opt.env = input.env;
            if (bench->count("--method") > 0) opt.method = parse_method(method);
            opt.master_seed = input.seed;
            opt.threads = threads;
            opt.timing = timing;
            cmd_bench(sweep, out_path, opt, out);
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace xlmimo
