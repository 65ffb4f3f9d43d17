#pragma once

#include "xlmimo/sparse.hpp"
#include "xlmimo/synth.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xlmimo {

/// A recovered, automatically paired target signature.
struct SignatureEstimate {
    double omega_theta = 0.0;
    double omega_r = 0.0;
    cdouble amplitude{};
    int group_id = 0;  ///< first-stage component the pair was found under
};

/// How the second stage turns the matrix into a 1D vector for each first-stage frequency.
enum class Projection {
    JointLeastSquares,  ///< least squares over all first-stage steering vectors at once
    MatchedSteering,    ///< conjugate inner product with the steering vector at the estimate
    NearestBin,         ///< same, at the nearest DFT bin
};

Projection parse_projection(std::string_view name);
std::string_view to_string(Projection projection);

struct EstimatorConfig {
    int oversampling = 16;
    /// Caps both stages at K atoms when the target count is known.
    std::optional<std::size_t> known_targets;
    /// Noise standard deviation hint for the residual stop rule.
    double noise_sigma = 0.0;
    double noise_factor = 3.0;
    /// Relative residual below which OMP stops even without noise.
    double residual_floor = 0.05;
    std::size_t max_atoms_cap = 16;
    /// Same-frequency merge tolerance in normalized frequency; 0.5/L per axis when unset.
    std::optional<double> merge_tolerance;
    std::optional<StopRule<double>> first_stage;
    std::optional<StopRule<double>> second_stage;
    /// First-stage snapshot count L_w (rows for narrowband, columns for wideband).
    int snapshots = 1;
    Projection projection = Projection::JointLeastSquares;
    /// Narrowband only: re-estimate each pair's range on the angle-demixed time series
    /// within the merge window of its group, then refit all amplitudes jointly.
    bool refine_pairs = true;
    OmpOptions<double> omp;
};

struct EstimateResult {
    std::vector<SignatureEstimate> signatures;  ///< sorted by group frequency, then second-axis frequency
    std::vector<double> group_frequencies;      ///< indexed by group_id
    std::vector<std::string> diagnostics;
    std::vector<std::pair<std::string, double>> stage_ms;  ///< wall-clock time per stage
};

/// Range-first decoupled estimation for the spatial-narrowband model.
EstimateResult estimate_narrowband(const IfMatrix& y, const EstimatorConfig& cfg = {});

/// Angle-first decoupled estimation with low-index SWE compensation.
EstimateResult estimate_wideband(const IfMatrix& y, const EstimatorConfig& cfg = {});

/// Y[m,n] * exp(-j 2 pi (alpha/N) omega_theta m n).
CMatrix compensate_swe(const CMatrix& y, double omega_theta_hat, double alpha);
IfMatrix compensate_swe(const IfMatrix& y, double omega_theta_hat, double alpha);

/// Largest first-stage snapshot count whose SW phase drift stays below pi/4.
int max_wideband_snapshots(double alpha, int samples, int elements, double omega_theta_max = 0.5);

struct FrequencyGroup {
    double frequency = 0.0;  ///< magnitude-weighted mean of the members
    cdouble amplitude{};     ///< complex sum of member coefficients
    std::vector<double> members;
};

/// Chains atoms closer than `tolerance` (circular distance) into groups sorted by frequency.
/// Frequencies are reported in [0, 1) when `signed_axis` is false, else in [-0.5, 0.5).
std::vector<FrequencyGroup> merge_frequencies(const std::vector<SparseAtom<double>>& atoms, double tolerance,
                                              bool signed_axis);

struct MatchedPair {
    std::size_t truth = 0;
    std::size_t estimate = 0;
    double err_theta = 0.0;
    double err_r = 0.0;
};

struct MatchReport {
    std::vector<MatchedPair> pairs;
    std::vector<std::size_t> misses;        ///< truth indices left unmatched
    std::vector<std::size_t> false_alarms;  ///< estimate indices left unmatched
    double rmse_theta = 0.0;                ///< NaN when nothing matched
    double rmse_r = 0.0;

    std::size_t matched() const { return pairs.size(); }
};

/// Greedy nearest-neighbour matching under the larger of the two tolerance-normalized
/// axis errors. A pair matches only when both axis errors are within tolerance.
MatchReport match_signatures(const std::vector<Signature>& truth, const std::vector<SignatureEstimate>& estimates,
                             double tol_theta, double tol_r);

}  // namespace xlmimo
