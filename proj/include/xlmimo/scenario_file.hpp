#pragma once

#include "xlmimo/estimate.hpp"
#include "xlmimo/synth.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xlmimo {

/// Malformed or inconsistent configuration. `line` is 0 when the problem does not
/// come from a specific line (environment overrides, cross-field checks).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, std::size_t line, std::string key, const std::string& what);

    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    std::string source_;
    std::size_t line_;
    std::string key_;
};

/// Unreadable input or unwritable output.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Estimator-side settings carried by a scenario file.
struct EstimatorSettings {
    SignalModel model = SignalModel::Narrowband;
    EstimatorConfig config;
    /// Stop both stages at the scenario's target count.
    bool known_k = false;
    /// Noise hint for the stop rule; the scenario sigma when unset.
    std::optional<double> noise_sigma;
    double cluster_threshold = 0.3;
    double tol_theta = 0.01;
    double tol_r = 0.01;
};

struct ScenarioFile {
    Scenario scenario;
    EstimatorSettings estimator;
};

/// (NAME, value) pairs, e.g. {"XLMIMO_RADAR_ALPHA", "0.1"}.
using EnvOverrides = std::vector<std::pair<std::string, std::string>>;

/// Every XLMIMO_* variable of the current process environment, sorted by name.
EnvOverrides environment_overrides();

/// Parses a scenario document and applies the overrides on top.
///
/// Sections: [radar], [noise], repeated [target], [estimator]. Lines are
/// `key = value`; `#` and `;` start comments. Unknown sections or keys are errors.
/// An override XLMIMO_<SECTION>_<KEY> sets that key; targets are addressed as
/// XLMIMO_TARGET<index>_<KEY> with a zero-based index.
ScenarioFile parse_scenario(std::string_view text, std::string_view source = "<scenario>",
                            const EnvOverrides& env = {});

/// Reads and parses a file; throws IoError if it cannot be read.
ScenarioFile load_scenario(const std::filesystem::path& path, const EnvOverrides& env = {});

/// Canonical text form; parse_scenario(format_scenario(f)) reproduces f.
std::string format_scenario(const ScenarioFile& file);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

/// Locale-independent decimal parse of the whole string; nullopt on any junk.
std::optional<double> parse_number(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Builds the estimator configuration for a scenario (known K and noise hint resolved).
EstimatorConfig resolve_estimator_config(const ScenarioFile& file);

}  // namespace xlmimo
