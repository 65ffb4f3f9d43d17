#include "xlmimo/model.hpp"

#include <cmath>
#include <sstream>

namespace xlmimo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string describe(const std::vector<Violation>& violations) {
    std::ostringstream os;
    os << "invalid scenario:";
    for (const auto& v : violations) os << "\n  " << v.code << ": " << v.message;
    return os.str();
}

int expected_samples(const RadarParams& p) {
    // f_s * T_ch can land a hair above an integer after the division in make().
    const double product = p.sample_rate_hz * p.chirp_s;
    return static_cast<int>(std::ceil(product * (1.0 - 1e-12)));
}

}  // namespace

RadarParams RadarParams::make(double carrier_hz, double alpha, double chirp_s, int elements, int samples,
                              double spacing_over_lambda, double c) {
    RadarParams p;
    p.carrier_hz = carrier_hz;
    p.alpha = alpha;
    p.chirp_s = chirp_s;
    p.samples = samples;
    p.elements = elements;
    p.sample_rate_hz = static_cast<double>(samples) / chirp_s;
    p.c = c;
    p.spacing_m = spacing_over_lambda * c / carrier_hz;
    return p;
}

Target Target::at_normalized(double omega_theta, double omega_r, cdouble amplitude) {
    Target t;
    t.normalized = NormalizedLocation{omega_theta, omega_r};
    t.amplitude = amplitude;
    return t;
}

Target Target::at_physical(double range_m, double theta_deg, cdouble amplitude) {
    Target t;
    t.physical = PhysicalLocation{range_m, theta_deg};
    t.amplitude = amplitude;
    return t;
}

NormalizedLocation to_normalized(const RadarParams& params, double range_m, double theta_deg) {
    if (!(std::abs(theta_deg) < 90.0))
        throw ConversionError("theta " + std::to_string(theta_deg) + " deg outside (-90, 90)");
    if (!(range_m >= 0.0)) throw ConversionError("negative range " + std::to_string(range_m) + " m");

    NormalizedLocation out;
    out.omega_r = 2.0 * params.chirp_rate() * range_m / (params.c * params.sample_rate_hz);
    out.omega_theta = params.spacing_m * std::sin(theta_deg * kDegToRad) / params.wavelength_m();
    if (out.omega_r >= 1.0)
        throw ConversionError("aliased range frequency " + std::to_string(out.omega_r) + " for range " +
                              std::to_string(range_m) + " m (must be < 1 cycle/sample)");
    return out;
}

PhysicalLocation from_normalized(const RadarParams& params, double omega_r, double omega_theta) {
    const double gamma = params.chirp_rate();
    if (!(gamma > 0.0)) throw ConversionError("zero chirp rate: range is unobservable when alpha = 0");
    const double s = omega_theta * params.wavelength_m() / params.spacing_m;
    if (!(std::abs(s) <= 1.0))
        throw ConversionError("spatial frequency " + std::to_string(omega_theta) + " has no real angle");

    PhysicalLocation out;
    out.range_m = omega_r * params.c * params.sample_rate_hz / (2.0 * gamma);
    out.theta_deg = std::asin(s) / kDegToRad;
    return out;
}

Signature resolve(const RadarParams& params, const Target& target) {
    Signature sig;
    sig.amplitude = target.amplitude;
    if (target.normalized) {
        sig.omega_theta = target.normalized->omega_theta;
        sig.omega_r = target.normalized->omega_r;
    } else if (target.physical) {
        const auto n = to_normalized(params, target.physical->range_m, target.physical->theta_deg);
        sig.omega_theta = n.omega_theta;
        sig.omega_r = n.omega_r;
    } else {
        throw ConversionError("target has neither a physical nor a normalized location");
    }
    return sig;
}

std::vector<Signature> resolve_all(const Scenario& scenario) {
    std::vector<Signature> out;
    out.reserve(scenario.targets.size());
    for (const auto& t : scenario.targets) out.push_back(resolve(scenario.params, t));
    return out;
}

std::vector<Violation> validate(const RadarParams& p) {
    std::vector<Violation> v;
    auto add = [&v](std::string code, std::string msg) { v.push_back({std::move(code), std::move(msg)}); };

    if (!(p.carrier_hz > 0.0)) add("carrier", "carrier frequency must be positive");
    if (!(p.alpha >= 0.0 && p.alpha < 1.0)) add("alpha", "bandwidth selection alpha must lie in [0, 1)");
    if (!(p.chirp_s > 0.0)) add("chirp", "chirp duration must be positive");
    if (!(p.sample_rate_hz > 0.0)) add("sample_rate", "sampling frequency must be positive");
    if (p.samples < 1) add("samples", "fast-time sample count N must be at least 1");
    if (p.elements < 1) add("elements", "empty array: element count M must be at least 1");
    if (!(p.spacing_m > 0.0)) add("spacing", "element spacing must be positive");
    if (!(p.c > 0.0)) add("c", "propagation speed must be positive");
    if (p.samples >= 1 && p.sample_rate_hz > 0.0 && p.chirp_s > 0.0 && expected_samples(p) != p.samples)
        add("samples", "N = " + std::to_string(p.samples) + " does not equal ceil(f_s * T_ch) = " +
                           std::to_string(expected_samples(p)));
    return v;
}

std::vector<Violation> validate(const Scenario& scenario) {
    auto v = validate(scenario.params);
    auto add = [&v](std::string code, std::string msg) { v.push_back({std::move(code), std::move(msg)}); };

    if (!(scenario.noise_sigma >= 0.0) || !std::isfinite(scenario.noise_sigma))
        add("noise", "noise sigma must be finite and nonnegative");

    for (std::size_t k = 0; k < scenario.targets.size(); ++k) {
        const auto& t = scenario.targets[k];
        const std::string tag = "target " + std::to_string(k) + ": ";
        if (!t.physical && !t.normalized) {
            add("target_location", tag + "no location given");
            continue;
        }
        if (!std::isfinite(t.amplitude.real()) || !std::isfinite(t.amplitude.imag()))
            add("amplitude", tag + "amplitude must be finite");
        if (t.physical) {
            if (!(std::abs(t.physical->theta_deg) < 90.0)) add("theta", tag + "theta outside (-90, 90) deg");
            if (!(t.physical->range_m >= 0.0)) add("range", tag + "negative range");
        }
        double omega_r = 0.0;
        double omega_theta = 0.0;
        if (t.normalized) {
            omega_r = t.normalized->omega_r;
            omega_theta = t.normalized->omega_theta;
        } else {
            omega_r = 2.0 * scenario.params.chirp_rate() * t.physical->range_m /
                      (scenario.params.c * scenario.params.sample_rate_hz);
            omega_theta = scenario.params.spacing_m * std::sin(t.physical->theta_deg * kDegToRad) /
                          scenario.params.wavelength_m();
        }
        if (!(omega_r >= 0.0 && omega_r < 1.0))
            add("aliased_range", tag + "aliased range frequency " + std::to_string(omega_r) + " (needs [0, 1))");
        // Normalized input may use either the signed or the DFT-bin convention.
        const bool angle_ok = t.normalized ? (omega_theta >= -0.5 && omega_theta < 1.0) : std::abs(omega_theta) <= 0.5;
        if (!angle_ok)
            add("aliased_angle", tag + "aliased spatial frequency " + std::to_string(omega_theta) +
                                     (t.normalized ? " (needs [-0.5, 1))" : " (needs |omega_theta| <= 0.5)"));
    }
    return v;
}

InvalidScenario::InvalidScenario(std::vector<Violation> violations)
    : std::invalid_argument(describe(violations)), violations_(std::move(violations)) {}

void require_valid(const Scenario& scenario) {
    auto v = validate(scenario);
    if (!v.empty()) throw InvalidScenario(std::move(v));
}

}  // namespace xlmimo
