#include "xlmimo/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace xlmimo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// 53-bit uniform in (0, 1].
double unit_open_low(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

CVector steering(Eigen::Index length, double omega) {
    CVector v(length);
    for (Eigen::Index l = 0; l < length; ++l) v[l] = cis_cycles(omega * static_cast<double>(l));
    return v;
}

IfMatrix empty_matrix(const Scenario& scenario) {
    require_valid(scenario);
    IfMatrix y;
    y.params = scenario.params;
    y.data = CMatrix::Zero(scenario.params.elements, scenario.params.samples);
    return y;
}

}  // namespace

SignalModel parse_signal_model(std::string_view name) {
    if (name == "narrowband") return SignalModel::Narrowband;
    if (name == "wideband") return SignalModel::Wideband;
    if (name == "exact") return SignalModel::Exact;
    throw std::invalid_argument("unknown signal model '" + std::string(name) + "'");
}

std::string_view to_string(SignalModel model) {
    switch (model) {
        case SignalModel::Narrowband: return "narrowband";
        case SignalModel::Wideband: return "wideband";
        case SignalModel::Exact: return "exact";
    }
    return "unknown";
}

cdouble standard_noise(std::uint64_t seed, std::uint64_t m, std::uint64_t n) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ m);
    h = splitmix64(h ^ (n * 0xD1B54A32D192ED03ULL));
    const double u1 = unit_open_low(h);
    const double u2 = unit_open_low(splitmix64(h));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = kTwoPi<double> * u2;
    // Each quadrature carries half the unit variance.
    return {r * std::cos(phi) * std::numbers::sqrt2 * 0.5, r * std::sin(phi) * std::numbers::sqrt2 * 0.5};
}

IfMatrix add_noise(IfMatrix y, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
    if (sigma == 0.0) return y;
    for (Eigen::Index n = 0; n < y.data.cols(); ++n)
        for (Eigen::Index m = 0; m < y.data.rows(); ++m)
            y.data(m, n) += sigma * standard_noise(seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n));
    return y;
}

IfMatrix synth_narrowband(const Scenario& scenario) {
    IfMatrix y = empty_matrix(scenario);
    for (const auto& sig : resolve_all(scenario)) {
        const CVector b = steering(y.elements(), sig.omega_theta);
        const CVector a = steering(y.samples(), sig.omega_r);
        y.data.noalias() += sig.amplitude * b * a.transpose();
    }
    return add_noise(std::move(y), scenario.noise_sigma, scenario.seed);
}

IfMatrix synth_wideband(const Scenario& scenario) {
    IfMatrix y = empty_matrix(scenario);
    const double alpha = scenario.params.alpha;
    const int samples = scenario.params.samples;
    for (const auto& sig : resolve_all(scenario)) {
        const CVector b = steering(y.elements(), sig.omega_theta);
        const CVector a = steering(y.samples(), sig.omega_r);
        CMatrix term = sig.amplitude * b * a.transpose();
        if (alpha * sig.omega_theta != 0.0) {
            for (Eigen::Index n = 0; n < term.cols(); ++n)
                for (Eigen::Index m = 0; m < term.rows(); ++m)
                    term(m, n) *= cis_cycles(sw_cycles(alpha, samples, sig.omega_theta, m, n));
        }
        y.data += term;
    }
    return add_noise(std::move(y), scenario.noise_sigma, scenario.seed);
}

cdouble equivalent_amplitude(const RadarParams& params, const Target& target) {
    if (!target.physical) throw ConversionError("equivalent amplitude needs a physical target location");
    const double tau_r = 2.0 * target.physical->range_m / params.c;
    const double cycles = -0.5 * params.chirp_rate() * tau_r * tau_r + params.carrier_hz * tau_r;
    return std::conj(target.amplitude) * cis_cycles(cycles);
}

std::pair<double, double> dropped_quadratic_phases(const RadarParams& params, const PhysicalLocation& where,
                                                   Eigen::Index m) {
    const double gamma = params.chirp_rate();
    const double spatial = static_cast<double>(m) * params.spacing_m * std::sin(where.theta_deg * kDegToRad);
    const double c2 = params.c * params.c;
    const double pure = std::numbers::pi * gamma * spatial * spatial / c2;
    const double cross = kTwoPi<double> * gamma * 2.0 * where.range_m * spatial / c2;
    return {std::abs(pure), std::abs(cross)};
}

IfMatrix synth_exact(const Scenario& scenario, ExactOptions options) {
    IfMatrix y = empty_matrix(scenario);
    const RadarParams& p = scenario.params;
    const double gamma = p.chirp_rate();

    for (const auto& target : scenario.targets) {
        if (!target.physical) throw ConversionError("synth_exact needs physical target locations (range_m, theta_deg)");
        const double tau_r = 2.0 * target.physical->range_m / p.c;
        const double spatial_step = p.spacing_m * std::sin(target.physical->theta_deg * kDegToRad) / p.c;
        const cdouble amp = std::conj(target.amplitude);

        for (Eigen::Index m = 0; m < y.elements(); ++m) {
            const double tau_theta = static_cast<double>(m) * spatial_step;
            const double tau = tau_r + tau_theta;
            // Antenna-independent quadratic part is -gamma tau_r^2 / 2; the rest depends on m.
            const double quad = options.keep_quadratic ? -0.5 * gamma * tau * tau : -0.5 * gamma * tau_r * tau_r;
            const double carrier = p.carrier_hz * tau;
            for (Eigen::Index n = 0; n < y.samples(); ++n) {
                const double beat = gamma * tau * static_cast<double>(n) / p.sample_rate_hz;
                y.data(m, n) += amp * cis_cycles(beat + quad + carrier);
            }
        }
    }
    if (options.add_noise) return add_noise(std::move(y), scenario.noise_sigma, scenario.seed);
    return y;
}

IfMatrix synthesize(const Scenario& scenario, SignalModel model) {
    switch (model) {
        case SignalModel::Narrowband: return synth_narrowband(scenario);
        case SignalModel::Wideband: return synth_wideband(scenario);
        case SignalModel::Exact: return synth_exact(scenario, {.keep_quadratic = true, .add_noise = true});
    }
    throw std::invalid_argument("unknown signal model");
}

}  // namespace xlmimo
