#include "xlmimo/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace xlmimo {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

SweepAxis parse_sweep_axis(std::string_view name) {
    if (name == "sigma") return SweepAxis::Sigma;
    if (name == "alpha") return SweepAxis::Alpha;
    if (name == "M") return SweepAxis::Elements;
    if (name == "separation") return SweepAxis::Separation;
    throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "' (sigma, alpha, M, separation)");
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Sigma: return "sigma";
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::Elements: return "M";
        case SweepAxis::Separation: return "separation";
    }
    return "unknown";
}

SweepSpec parse_sweep(std::string_view text, std::string_view source, const std::filesystem::path& base_dir,
                      const EnvOverrides& env) {
    struct Item {
        std::string value;
        std::size_t line;
    };
    std::vector<std::pair<std::string, Item>> items;
    const std::string src(source);
    bool in_sweep = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    static const std::vector<std::string> allowed{"base",    "axis",      "values", "trials", "method",
                                                  "model",   "master_seed", "known_k", "tol_theta", "tol_r",
                                                  "pair",    "separation_along"};
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line != "[sweep]")
                throw ConfigError(src, line_no, std::string(line), "only a [sweep] section is allowed");
            if (in_sweep) throw ConfigError(src, line_no, "sweep", "section [sweep] repeated");
            in_sweep = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(src, line_no, std::string(line), "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        if (!in_sweep) throw ConfigError(src, line_no, key, "key '" + key + "' outside [sweep]");
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(src, line_no, key, "unknown key '" + key + "' in section [sweep]");
        for (const auto& [k, it] : items)
            if (k == key) throw ConfigError(src, line_no, key, "duplicate key '" + key + "'");
        items.push_back({key, {std::string(trim(line.substr(eq + 1))), line_no}});
    }
    auto find = [&](std::string_view key) -> const Item* {
        for (const auto& [k, it] : items)
            if (k == key) return &it;
        return nullptr;
    };
    auto require = [&](std::string_view key) -> const Item& {
        const Item* it = find(key);
        if (!it) throw ConfigError(src, 0, std::string(key), "missing required key '" + std::string(key) + "'");
        return *it;
    };
    auto error = [&](std::string_view key, const Item& it, const std::string& what) {
        return ConfigError(src, it.line, std::string(key), what);
    };
    auto number = [&](std::string_view key, const Item& it) {
        const auto v = parse_number(it.value);
        if (!v) throw error(key, it, "'" + std::string(key) + "' expects a number, got '" + it.value + "'");
        return *v;
    };

    SweepSpec spec;
    const Item& base = require("base");
    std::filesystem::path base_path(base.value);
    if (base_path.is_relative()) base_path = base_dir / base_path;
    spec.base = load_scenario(base_path, env);

    const Item& axis = require("axis");
    try {
        spec.axis = parse_sweep_axis(axis.value);
    } catch (const std::invalid_argument& e) {
        throw error("axis", axis, e.what());
    }

    const Item& values = require("values");
    std::string_view rest = values.value;
    while (true) {
        const auto comma = rest.find(',');
        const auto token = trim(rest.substr(0, comma));
        const auto v = parse_number(token);
        if (!v) throw error("values", values, "bad sweep value '" + std::string(token) + "'");
        spec.values.push_back(*v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }

    if (const Item* it = find("trials")) {
        const double t = number("trials", *it);
        if (t != std::floor(t) || t < 1 || t > 1e6) throw error("trials", *it, "'trials' expects a positive integer");
        spec.trials = static_cast<int>(t);
    }
    if (const Item* it = find("method")) {
        try {
            spec.method = parse_method(it->value);
        } catch (const std::invalid_argument& e) {
            throw error("method", *it, e.what());
        }
    }
    if (const Item* it = find("model")) {
        try {
            spec.base.estimator.model = parse_signal_model(it->value);
        } catch (const std::invalid_argument& e) {
            throw error("model", *it, e.what());
        }
    }
    if (const Item* it = find("master_seed")) {
        const auto* first = it->value.data();
        const auto [ptr, ec] = std::from_chars(first, first + it->value.size(), spec.master_seed);
        if (ec != std::errc{} || ptr != first + it->value.size())
            throw error("master_seed", *it, "'master_seed' expects an unsigned integer");
    }
    // Truth is available to the bench, so the known target count is the default stop rule.
    spec.base.estimator.known_k = true;
    if (const Item* it = find("known_k")) {
        if (it->value == "true") spec.base.estimator.known_k = true;
        else if (it->value == "false") spec.base.estimator.known_k = false;
        else throw error("known_k", *it, "'known_k' expects true or false");
    }
    if (const Item* it = find("tol_theta")) spec.base.estimator.tol_theta = number("tol_theta", *it);
    if (const Item* it = find("tol_r")) spec.base.estimator.tol_r = number("tol_r", *it);
    if (const Item* it = find("pair")) {
        const auto comma = it->value.find(',');
        const auto a = parse_number(it->value.substr(0, comma));
        const auto b = comma == std::string::npos ? std::nullopt : parse_number(it->value.substr(comma + 1));
        if (!a || !b || *a < 0 || *b < 0 || *a == *b || *a != std::floor(*a) || *b != std::floor(*b))
            throw error("pair", *it, "'pair' expects two distinct target indices like '0,1'");
        spec.pair_first = static_cast<std::size_t>(*a);
        spec.pair_second = static_cast<std::size_t>(*b);
    }
    if (const Item* it = find("separation_along")) {
        if (it->value == "theta") spec.separation_along_theta = true;
        else if (it->value == "range") spec.separation_along_theta = false;
        else throw error("separation_along", *it, "'separation_along' expects theta or range");
    }

    // Every point must produce a valid scenario before anything runs.
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        try {
            const auto violations = validate(sweep_point(spec, i).scenario);
            if (!violations.empty())
                throw ConfigError(src, values.line, "values",
                                  "sweep value " + format_number(spec.values[i]) + ": " + violations.front().message);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(src, values.line, "values", e.what());
        }
    }
    return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path, const EnvOverrides& env) {
    return parse_sweep(read_text_file(path), path.string(), path.parent_path(), env);
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t axis_index, int trial) {
    return mix(mix(mix(master_seed) ^ static_cast<std::uint64_t>(axis_index)) ^ static_cast<std::uint64_t>(trial));
}

ScenarioFile sweep_point(const SweepSpec& spec, std::size_t axis_index) {
    ScenarioFile f = spec.base;
    const double v = spec.values.at(axis_index);
    switch (spec.axis) {
        case SweepAxis::Sigma: f.scenario.noise_sigma = v; break;
        case SweepAxis::Alpha: f.scenario.params.alpha = v; break;
        case SweepAxis::Elements:
            if (v != std::floor(v) || v < 1) throw std::invalid_argument("M sweep values must be positive integers");
            f.scenario.params.elements = static_cast<int>(v);
            break;
        case SweepAxis::Separation: {
            auto& targets = f.scenario.targets;
            if (std::max(spec.pair_first, spec.pair_second) >= targets.size())
                throw std::invalid_argument("separation sweep: pair indices exceed the target count");
            const auto& a = targets[spec.pair_first];
            auto& b = targets[spec.pair_second];
            if (!a.normalized || !b.normalized)
                throw std::invalid_argument("separation sweep needs normalized target locations");
            if (spec.separation_along_theta) {
                b.normalized->omega_theta = a.normalized->omega_theta + v;
            } else {
                b.normalized->omega_r = a.normalized->omega_r + v;
            }
            break;
        }
    }
    return f;
}

std::vector<BenchRow> run_sweep(const SweepSpec& spec, int threads, bool timing) {
    const std::size_t points = spec.values.size();
    const auto trials = static_cast<std::size_t>(spec.trials);
    std::vector<BenchRow> rows(points * trials);
    std::vector<ScenarioFile> bases;
    for (std::size_t i = 0; i < points; ++i) bases.push_back(sweep_point(spec, i));

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (true) {
            const std::size_t job = next.fetch_add(1);
            if (job >= rows.size()) return;
            try {
                const std::size_t point = job / trials;
                const int trial = static_cast<int>(job % trials);
                ScenarioFile f = bases[point];
                f.scenario.seed = trial_seed(spec.master_seed, point, trial);

                const auto t0 = std::chrono::steady_clock::now();
                const IfMatrix y = synthesize_scenario(f);
                const PipelineResult r = run_pipeline(y, f, spec.method);
                const auto t1 = std::chrono::steady_clock::now();

                const auto truth = resolve_all(f.scenario);
                const MatchReport m =
                    match_signatures(truth, r.signatures, f.estimator.tol_theta, f.estimator.tol_r);
                BenchRow& row = rows[job];
                row.axis_value = spec.values[point];
                row.trial = trial;
                row.detections = r.signatures.size();
                row.misses = m.misses.size();
                row.false_alarms = m.false_alarms.size();
                row.rmse_theta = m.rmse_theta;
                row.rmse_r = m.rmse_r;
                row.runtime_ms = timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(rows.size());
            }
        }
    };

    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(rows.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    return rows;
}

std::string format_bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << "axis_value,trial,detections,misses,false_alarms,rmse_theta,rmse_r,runtime_ms\n";
    for (const auto& r : rows)
        os << format_number(r.axis_value) << ',' << r.trial << ',' << r.detections << ',' << r.misses << ','
           << r.false_alarms << ',' << format_number(r.rmse_theta) << ',' << format_number(r.rmse_r) << ','
           << format_number(r.runtime_ms) << '\n';
    return os.str();
}

}  // namespace xlmimo
