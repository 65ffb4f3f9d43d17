#pragma once

#include "xlmimo/model.hpp"

#include <cstdint>
#include <string_view>
#include <utility>

namespace xlmimo {

/// M x N IF measurement. Row m is the virtual antenna, column n the fast-time sample.
struct IfMatrix {
    CMatrix data;
    RadarParams params;

    Eigen::Index elements() const { return data.rows(); }
    Eigen::Index samples() const { return data.cols(); }
};

enum class SignalModel { Narrowband, Wideband, Exact };

SignalModel parse_signal_model(std::string_view name);
std::string_view to_string(SignalModel model);

/// Phase of the spatial-wideband coupling term at (m, n), in cycles.
inline double sw_cycles(double alpha, int samples, double omega_theta, Eigen::Index m, Eigen::Index n) {
    return alpha / samples * omega_theta * static_cast<double>(m * n);
}

IfMatrix synth_narrowband(const Scenario& scenario);
IfMatrix synth_wideband(const Scenario& scenario);

struct ExactOptions {
    /// Keep the antenna-dependent quadratic phase terms. The antenna-independent
    /// part is always folded into the equivalent amplitude.
    bool keep_quadratic = true;
    bool add_noise = false;
};

/// Full-delay IF model; every target needs a physical location.
IfMatrix synth_exact(const Scenario& scenario, ExactOptions options = {});

IfMatrix synthesize(const Scenario& scenario, SignalModel model);

/// Adds i.i.d. CN(0, sigma^2) noise keyed by (seed, m, n).
IfMatrix add_noise(IfMatrix y, double sigma, std::uint64_t seed);

/// Unit-variance circular complex Gaussian sample for the counter (seed, m, n).
cdouble standard_noise(std::uint64_t seed, std::uint64_t m, std::uint64_t n);

/// Amplitude the approximate models must carry to match synth_exact for a
/// physically placed target: conj(a) exp(-j pi gamma tau_R^2) exp(j 2 pi f_c tau_R).
cdouble equivalent_amplitude(const RadarParams& params, const Target& target);

/// Magnitudes (rad) of the two antenna-dependent quadratic phase terms that the
/// approximate models drop: pi gamma (m d sin(theta)/c)^2 and 2 pi gamma 2 R m d sin(theta)/c^2.
std::pair<double, double> dropped_quadratic_phases(const RadarParams& params, const PhysicalLocation& where,
                                                   Eigen::Index m);

}  // namespace xlmimo
