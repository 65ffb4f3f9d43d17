#pragma once

#include "xlmimo/types.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xlmimo {

inline constexpr double kSpeedOfLight = 2.9979e8;

/// Raised when a physical quantity cannot be mapped to a normalized frequency
/// (or back) without aliasing or leaving the valid domain.
class ConversionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Physical MIMO-FMCW configuration.
///
/// The chirp rate and wavelength are derived on access, so gamma = alpha*f_c/T_ch
/// and lambda = c/f_c hold exactly for every instance.
struct RadarParams {
    double carrier_hz = 77e9;
    double alpha = 0.0;          ///< bandwidth selection, BW = alpha * f_c
    double chirp_s = 50e-6;
    double sample_rate_hz = 256.0 / 50e-6;
    int samples = 256;           ///< N, fast-time samples per chirp
    int elements = 256;          ///< M, virtual array elements
    double spacing_m = 0.5 * kSpeedOfLight / 77e9;  ///< d
    double c = kSpeedOfLight;

    double bandwidth_hz() const { return alpha * carrier_hz; }
    double chirp_rate() const { return alpha * carrier_hz / chirp_s; }
    double wavelength_m() const { return c / carrier_hz; }
    double spacing_over_lambda() const { return spacing_m / wavelength_m(); }

    /// Builds a consistent parameter set with f_s chosen so that N = f_s * T_ch.
    static RadarParams make(double carrier_hz, double alpha, double chirp_s, int elements, int samples,
                            double spacing_over_lambda = 0.5, double c = kSpeedOfLight);
};

struct PhysicalLocation {
    double range_m = 0.0;
    double theta_deg = 0.0;
};

struct NormalizedLocation {
    double omega_theta = 0.0;  ///< cycles per element
    double omega_r = 0.0;      ///< cycles per fast-time sample
};

/// A paired target signature in normalized units.
struct Signature {
    double omega_theta = 0.0;
    double omega_r = 0.0;
    cdouble amplitude{1.0, 0.0};
};

/// One scatterer. Either location form may be given; the normalized one wins
/// when both are present.
struct Target {
    std::optional<PhysicalLocation> physical;
    std::optional<NormalizedLocation> normalized;
    cdouble amplitude{1.0, 0.0};

    static Target at_normalized(double omega_theta, double omega_r, cdouble amplitude = {1.0, 0.0});
    static Target at_physical(double range_m, double theta_deg, cdouble amplitude = {1.0, 0.0});
};

struct Scenario {
    RadarParams params;
    std::vector<Target> targets;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct Violation {
    std::string code;
    std::string message;
};

NormalizedLocation to_normalized(const RadarParams& params, double range_m, double theta_deg);
PhysicalLocation from_normalized(const RadarParams& params, double omega_r, double omega_theta);

/// Normalized signature of a target; throws ConversionError if it has no location.
Signature resolve(const RadarParams& params, const Target& target);
std::vector<Signature> resolve_all(const Scenario& scenario);

/// Every invariant violation in the scenario; empty means valid.
std::vector<Violation> validate(const Scenario& scenario);
std::vector<Violation> validate(const RadarParams& params);

class InvalidScenario : public std::invalid_argument {
public:
    explicit InvalidScenario(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Throws InvalidScenario if validate() reports anything.
void require_valid(const Scenario& scenario);

}  // namespace xlmimo
