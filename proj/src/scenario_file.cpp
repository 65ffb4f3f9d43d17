#include "xlmimo/scenario_file.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

extern char** environ;

namespace xlmimo {

namespace {

constexpr std::string_view kEnvPrefix = "XLMIMO_";

struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
    std::string origin;  // env variable name when set by an override
};

struct Section {
    std::string name;
    std::size_t line = 0;
    std::vector<Entry> entries;

    Entry* find(std::string_view key) {
        for (auto& e : entries)
            if (e.key == key) return &e;
        return nullptr;
    }
};

const std::map<std::string, std::vector<std::string>, std::less<>>& known_keys() {
    static const std::map<std::string, std::vector<std::string>, std::less<>> keys{
        {"radar", {"f_c", "alpha", "T_ch", "f_s", "M", "N", "d_over_lambda", "c"}},
        {"noise", {"sigma", "seed"}},
        {"target", {"range_m", "theta_deg", "omega_r", "omega_theta", "amplitude_re", "amplitude_im"}},
        {"estimator",
         {"model", "O_f", "delta", "known_k", "noise_sigma", "noise_factor", "residual_floor", "max_atoms",
          "stage1_max_atoms", "stage1_rel_residual", "stage2_max_atoms", "stage2_rel_residual", "snapshots",
          "projection", "refine_pairs", "refine_support", "cluster_threshold", "tol_theta", "tol_r"}},
    };
    return keys;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& ch : out)
        if (ch >= 'a' && ch <= 'z') ch = static_cast<char>(ch - 'a' + 'A');
    return out;
}

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    std::vector<Section> parse(std::string_view text) {
        std::vector<Section> sections;
        std::size_t line_no = 0;
        std::size_t pos = 0;
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
                if (line.back() != ']') fail(line_no, std::string(line), "unterminated section header");
                const std::string name(trim(line.substr(1, line.size() - 2)));
                if (!known_keys().contains(name)) fail(line_no, name, "unknown section [" + name + "]");
                if (name != "target")
                    for (const auto& s : sections)
                        if (s.name == name)
                            fail(line_no, name, "section [" + name + "] repeated (first on line " +
                                                    std::to_string(s.line) + ")");
                sections.push_back({name, line_no, {}});
                continue;
            }

            const auto eq = line.find('=');
            if (eq == std::string_view::npos) fail(line_no, std::string(line), "expected 'key = value'");
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            if (key.empty()) fail(line_no, key, "missing key before '='");
            if (sections.empty()) fail(line_no, key, "key '" + key + "' outside any section");
            Section& sec = sections.back();
            const auto& allowed = known_keys().at(sec.name);
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                fail(line_no, key, "unknown key '" + key + "' in section [" + sec.name + "]");
            if (const Entry* prev = sec.find(key))
                fail(line_no, key, "duplicate key '" + key + "' (first on line " + std::to_string(prev->line) + ")");
            if (value.empty()) fail(line_no, key, "empty value for '" + key + "'");
            sec.entries.push_back({key, value, line_no, {}});
        }
        return sections;
    }

    [[noreturn]] void fail(std::size_t line, const std::string& key, const std::string& what) const {
        throw ConfigError(source_, line, key, what);
    }

private:
    std::string source_;
};

void apply_overrides(std::vector<Section>& sections, const EnvOverrides& env) {
    for (const auto& [name, value] : env) {
        auto reject = [&](const std::string& what) { throw ConfigError("environment", 0, name, what); };
        if (!name.starts_with(kEnvPrefix)) reject("override '" + name + "' lacks the XLMIMO_ prefix");
        const std::string_view rest = std::string_view(name).substr(kEnvPrefix.size());

        Section* target_section = nullptr;
        std::string_view key_part;
        std::string section_name;
        for (const auto& [sec, keys] : known_keys()) {
            const std::string head = upper(sec);
            if (!rest.starts_with(head)) continue;
            std::string_view after = rest.substr(head.size());
            if (sec == "target") {
                std::size_t digits = 0;
                while (digits < after.size() && after[digits] >= '0' && after[digits] <= '9') ++digits;
                if (digits == 0 || digits >= after.size() || after[digits] != '_') continue;
                std::size_t index = 0;
                std::from_chars(after.data(), after.data() + digits, index);
                std::size_t seen = 0;
                for (auto& s : sections) {
                    if (s.name != "target") continue;
                    if (seen++ == index) target_section = &s;
                }
                if (!target_section)
                    reject("override addresses target " + std::to_string(index) + " but the scenario has " +
                           std::to_string(seen));
                key_part = after.substr(digits + 1);
            } else {
                if (after.empty() || after.front() != '_') continue;
                key_part = after.substr(1);
            }
            section_name = sec;
            break;
        }
        if (section_name.empty()) reject("unknown override '" + name + "'");

        const auto& keys = known_keys().at(section_name);
        const auto it =
            std::find_if(keys.begin(), keys.end(), [&](const std::string& k) { return upper(k) == key_part; });
        if (it == keys.end()) reject("unknown override '" + name + "'");
        if (trim(value).empty()) reject("empty value in override '" + name + "'");

        if (!target_section) {
            for (auto& s : sections)
                if (s.name == section_name) target_section = &s;
            if (!target_section) {
                sections.push_back({section_name, 0, {}});
                target_section = &sections.back();
            }
        }
        if (Entry* e = target_section->find(*it)) {
            e->value = std::string(trim(value));
            e->origin = name;
            e->line = 0;
        } else {
            target_section->entries.push_back({*it, std::string(trim(value)), 0, name});
        }
    }
}

class Interpreter {
public:
    explicit Interpreter(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const Entry& e, const std::string& what) const {
        if (!e.origin.empty()) throw ConfigError("environment", 0, e.origin, what);
        throw ConfigError(source_, e.line, e.key, what);
    }

    double number(const Entry& e) const {
        const auto v = parse_number(e.value);
        if (!v) fail(e, "'" + e.key + "' expects a finite decimal number, got '" + e.value + "'");
        return *v;
    }

    int integer(const Entry& e, int lo) const {
        const double v = number(e);
        if (v != std::floor(v) || v < lo || v > std::numeric_limits<int>::max())
            fail(e, "'" + e.key + "' expects an integer >= " + std::to_string(lo) + ", got '" + e.value + "'");
        return static_cast<int>(v);
    }

    std::uint64_t unsigned_integer(const Entry& e) const {
        std::uint64_t v = 0;
        const auto* first = e.value.data();
        const auto* last = first + e.value.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last)
            fail(e, "'" + e.key + "' expects an unsigned integer, got '" + e.value + "'");
        return v;
    }

    bool boolean(const Entry& e) const {
        if (e.value == "true" || e.value == "1") return true;
        if (e.value == "false" || e.value == "0") return false;
        fail(e, "'" + e.key + "' expects true or false, got '" + e.value + "'");
    }

    ScenarioFile run(std::vector<Section>& sections) {
        ScenarioFile file;
        Scenario& sc = file.scenario;

        for (auto& sec : sections) {
            if (sec.name == "radar") read_radar(sec, sc.params);
            if (sec.name == "noise") {
                if (const Entry* e = sec.find("sigma")) {
                    sc.noise_sigma = number(*e);
                    if (sc.noise_sigma < 0.0) fail(*e, "'sigma' must be nonnegative");
                }
                if (const Entry* e = sec.find("seed")) sc.seed = unsigned_integer(*e);
            }
            if (sec.name == "target") sc.targets.push_back(read_target(sec));
            if (sec.name == "estimator") read_estimator(sec, file.estimator);
        }

        const auto violations = validate(sc);
        if (!violations.empty()) {
            std::string msg = "invalid scenario:";
            for (const auto& v : violations) msg += "\n  " + v.code + ": " + v.message;
            throw ConfigError(source_, 0, violations.front().code, msg);
        }
        return file;
    }

private:
    void read_radar(Section& sec, RadarParams& p) const {
        double carrier = p.carrier_hz;
        double chirp = p.chirp_s;
        double d_over_lambda = 0.5;
        double c = kSpeedOfLight;
        std::optional<double> rate;
        std::optional<int> samples;
        if (const Entry* e = sec.find("f_c")) carrier = number(*e);
        if (const Entry* e = sec.find("alpha")) p.alpha = number(*e);
        if (const Entry* e = sec.find("T_ch")) chirp = number(*e);
        if (const Entry* e = sec.find("f_s")) rate = number(*e);
        if (const Entry* e = sec.find("M")) p.elements = integer(*e, 0);
        if (const Entry* e = sec.find("N")) samples = integer(*e, 0);
        if (const Entry* e = sec.find("d_over_lambda")) d_over_lambda = number(*e);
        if (const Entry* e = sec.find("c")) c = number(*e);

        p.carrier_hz = carrier;
        p.chirp_s = chirp;
        p.c = c;
        p.spacing_m = d_over_lambda * c / carrier;
        if (rate) {
            p.sample_rate_hz = *rate;
            p.samples = samples ? *samples : static_cast<int>(std::ceil(*rate * chirp * (1.0 - 1e-12)));
        } else {
            p.samples = samples.value_or(p.samples);
            p.sample_rate_hz = static_cast<double>(p.samples) / chirp;
        }
    }

    Target read_target(Section& sec) const {
        Target t;
        const Entry* r = sec.find("range_m");
        const Entry* th = sec.find("theta_deg");
        const Entry* wr = sec.find("omega_r");
        const Entry* wt = sec.find("omega_theta");
        const Entry header{"target", "", sec.line, {}};
        if (static_cast<bool>(r) != static_cast<bool>(th))
            fail(r ? *r : *th, "a physical target needs both range_m and theta_deg");
        if (static_cast<bool>(wr) != static_cast<bool>(wt))
            fail(wr ? *wr : *wt, "a normalized target needs both omega_r and omega_theta");
        if (!r && !wr) fail(header, "target has no location (give range_m/theta_deg or omega_r/omega_theta)");
        if (r) t.physical = PhysicalLocation{number(*r), number(*th)};
        if (wr) t.normalized = NormalizedLocation{number(*wt), number(*wr)};
        double re = 1.0;
        double im = 0.0;
        if (const Entry* e = sec.find("amplitude_re")) re = number(*e);
        if (const Entry* e = sec.find("amplitude_im")) im = number(*e);
        t.amplitude = {re, im};
        return t;
    }

    void read_estimator(Section& sec, EstimatorSettings& s) const {
        EstimatorConfig& cfg = s.config;
        if (const Entry* e = sec.find("model")) {
            try {
                s.model = parse_signal_model(e->value);
            } catch (const std::invalid_argument& ex) {
                fail(*e, ex.what());
            }
        }
        if (const Entry* e = sec.find("O_f")) cfg.oversampling = integer(*e, 1);
        if (const Entry* e = sec.find("delta")) {
            cfg.merge_tolerance = number(*e);
            if (*cfg.merge_tolerance < 0.0) fail(*e, "'delta' must be nonnegative");
        }
        if (const Entry* e = sec.find("known_k")) s.known_k = boolean(*e);
        if (const Entry* e = sec.find("noise_sigma")) {
            s.noise_sigma = number(*e);
            if (*s.noise_sigma < 0.0) fail(*e, "'noise_sigma' must be nonnegative");
        }
        if (const Entry* e = sec.find("noise_factor")) {
            cfg.noise_factor = number(*e);
            if (cfg.noise_factor <= 0.0) fail(*e, "'noise_factor' must be positive");
        }
        if (const Entry* e = sec.find("residual_floor")) {
            cfg.residual_floor = number(*e);
            if (cfg.residual_floor < 0.0 || cfg.residual_floor >= 1.0) fail(*e, "'residual_floor' must lie in [0, 1)");
        }
        if (const Entry* e = sec.find("max_atoms")) cfg.max_atoms_cap = static_cast<std::size_t>(integer(*e, 1));
        read_stage(sec, "stage1", cfg.first_stage);
        read_stage(sec, "stage2", cfg.second_stage);
        if (const Entry* e = sec.find("snapshots")) cfg.snapshots = integer(*e, 1);
        if (const Entry* e = sec.find("projection")) {
            try {
                cfg.projection = parse_projection(e->value);
            } catch (const std::invalid_argument& ex) {
                fail(*e, ex.what());
            }
        }
        if (const Entry* e = sec.find("refine_pairs")) cfg.refine_pairs = boolean(*e);
        if (const Entry* e = sec.find("refine_support")) cfg.omp.refine_support = boolean(*e);
        if (const Entry* e = sec.find("cluster_threshold")) {
            s.cluster_threshold = number(*e);
            if (!(s.cluster_threshold > 0.0 && s.cluster_threshold < 1.0))
                fail(*e, "'cluster_threshold' must lie in (0, 1)");
        }
        if (const Entry* e = sec.find("tol_theta")) {
            s.tol_theta = number(*e);
            if (s.tol_theta < 0.0) fail(*e, "'tol_theta' must be nonnegative");
        }
        if (const Entry* e = sec.find("tol_r")) {
            s.tol_r = number(*e);
            if (s.tol_r < 0.0) fail(*e, "'tol_r' must be nonnegative");
        }
    }

    void read_stage(Section& sec, const std::string& prefix, std::optional<StopRule<double>>& rule) const {
        const Entry* k = sec.find(prefix + "_max_atoms");
        const Entry* eps = sec.find(prefix + "_rel_residual");
        if (!k && !eps) return;
        rule.emplace();
        if (k) rule->max_atoms = static_cast<std::size_t>(integer(*k, 1));
        if (eps) {
            rule->rel_residual = number(*eps);
            if (*rule->rel_residual < 0.0) fail(*eps, "'" + eps->key + "' must be nonnegative");
        }
    }

    std::string source_;
};

}  // namespace

ConfigError::ConfigError(std::string source, std::size_t line, std::string key, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      source_(std::move(source)),
      line_(line),
      key_(std::move(key)) {}

EnvOverrides environment_overrides() {
    EnvOverrides out;
    for (char** e = environ; e && *e; ++e) {
        const std::string_view entry(*e);
        if (!entry.starts_with(kEnvPrefix)) continue;
        const auto eq = entry.find('=');
        if (eq == std::string_view::npos) continue;
        out.emplace_back(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw std::logic_error("format_number: buffer too small");
    return std::string(buf.data(), ptr);
}

ScenarioFile parse_scenario(std::string_view text, std::string_view source, const EnvOverrides& env) {
    Reader reader{std::string(source)};
    auto sections = reader.parse(text);
    apply_overrides(sections, env);
    return Interpreter{std::string(source)}.run(sections);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw IoError("error while writing '" + path.string() + "'");
}

ScenarioFile load_scenario(const std::filesystem::path& path, const EnvOverrides& env) {
    return parse_scenario(read_text_file(path), path.string(), env);
}

std::string format_scenario(const ScenarioFile& file) {
    const Scenario& sc = file.scenario;
    const RadarParams& p = sc.params;
    std::ostringstream os;
    os << "[radar]\n"
       << "f_c = " << format_number(p.carrier_hz) << "\n"
       << "alpha = " << format_number(p.alpha) << "\n"
       << "T_ch = " << format_number(p.chirp_s) << "\n"
       << "f_s = " << format_number(p.sample_rate_hz) << "\n"
       << "M = " << p.elements << "\n"
       << "N = " << p.samples << "\n"
       << "d_over_lambda = " << format_number(p.spacing_over_lambda()) << "\n"
       << "c = " << format_number(p.c) << "\n"
       << "\n[noise]\n"
       << "sigma = " << format_number(sc.noise_sigma) << "\n"
       << "seed = " << sc.seed << "\n";
    for (const auto& t : sc.targets) {
        os << "\n[target]\n";
        if (t.physical)
            os << "range_m = " << format_number(t.physical->range_m) << "\n"
               << "theta_deg = " << format_number(t.physical->theta_deg) << "\n";
        if (t.normalized)
            os << "omega_theta = " << format_number(t.normalized->omega_theta) << "\n"
               << "omega_r = " << format_number(t.normalized->omega_r) << "\n";
        os << "amplitude_re = " << format_number(t.amplitude.real()) << "\n"
           << "amplitude_im = " << format_number(t.amplitude.imag()) << "\n";
    }
    const EstimatorSettings& s = file.estimator;
    const EstimatorConfig& cfg = s.config;
    os << "\n[estimator]\n"
       << "model = " << to_string(s.model) << "\n"
       << "O_f = " << cfg.oversampling << "\n";
    if (cfg.merge_tolerance) os << "delta = " << format_number(*cfg.merge_tolerance) << "\n";
    os << "known_k = " << (s.known_k ? "true" : "false") << "\n";
    if (s.noise_sigma) os << "noise_sigma = " << format_number(*s.noise_sigma) << "\n";
    os << "noise_factor = " << format_number(cfg.noise_factor) << "\n"
       << "residual_floor = " << format_number(cfg.residual_floor) << "\n"
       << "max_atoms = " << cfg.max_atoms_cap << "\n";
    auto stage = [&os](const char* prefix, const std::optional<StopRule<double>>& rule) {
        if (!rule) return;
        if (rule->max_atoms) os << prefix << "_max_atoms = " << *rule->max_atoms << "\n";
        if (rule->rel_residual) os << prefix << "_rel_residual = " << format_number(*rule->rel_residual) << "\n";
    };
    stage("stage1", cfg.first_stage);
    stage("stage2", cfg.second_stage);
    os << "snapshots = " << cfg.snapshots << "\n"
       << "projection = " << to_string(cfg.projection) << "\n"
       << "refine_pairs = " << (cfg.refine_pairs ? "true" : "false") << "\n"
       << "refine_support = " << (cfg.omp.refine_support ? "true" : "false") << "\n"
       << "cluster_threshold = " << format_number(s.cluster_threshold) << "\n"
       << "tol_theta = " << format_number(s.tol_theta) << "\n"
       << "tol_r = " << format_number(s.tol_r) << "\n";
    return os.str();
}

EstimatorConfig resolve_estimator_config(const ScenarioFile& file) {
    EstimatorConfig cfg = file.estimator.config;
    if (file.estimator.known_k) cfg.known_targets = file.scenario.targets.size();
    cfg.noise_sigma = file.estimator.noise_sigma.value_or(file.scenario.noise_sigma);
    return cfg;
}

}  // namespace xlmimo
