#include "xlmimo/estimate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace xlmimo {

namespace {

using Dict = Dictionary<double>;

class StageClock {
public:
    explicit StageClock(EstimateResult& result) : result_(result), last_(std::chrono::steady_clock::now()) {}
    void lap(const char* name) {
        const auto now = std::chrono::steady_clock::now();
        result_.stage_ms.emplace_back(name, std::chrono::duration<double, std::milli>(now - last_).count());
        last_ = now;
    }

private:
    EstimateResult& result_;
    std::chrono::steady_clock::time_point last_;
};

CVector steering(Eigen::Index length, double omega) {
    CVector v(length);
    for (Eigen::Index l = 0; l < length; ++l) v[l] = cis_cycles(omega * static_cast<double>(l));
    return v;
}

// With a known target count the first stage stops on K alone (plus the floor); the
// noise term would otherwise swamp a single low-SNR snapshot. Group populations in
// the second stage are unknown, so it always keeps the noise term.
StopRule<double> stage_rule(const std::optional<StopRule<double>>& explicit_rule, const EstimatorConfig& cfg,
                            bool first_stage, double noise_std, double samples_in_fit, double norm_y) {
    if (explicit_rule) return *explicit_rule;
    StopRule<double> rule;
    rule.max_atoms = cfg.known_targets.value_or(cfg.max_atoms_cap);
    double eps = cfg.residual_floor;
    const bool use_noise = !(first_stage && cfg.known_targets);
    if (use_noise && noise_std > 0.0 && norm_y > 0.0)
        eps = std::max(eps, cfg.noise_factor * noise_std * std::sqrt(samples_in_fit) / norm_y);
    rule.rel_residual = eps;
    return rule;
}

std::string describe_stop(const SparseSolution<double>& sol) {
    std::string s(to_string(sol.stop));
    if (!sol.diagnostic.empty()) s += " (" + sol.diagnostic + ")";
    return s;
}

// Row r of the result is the length-M spatial vector for range group r.
CMatrix project_time_axis(const CMatrix& y, const std::vector<double>& freqs, Projection mode) {
    const Eigen::Index n = y.cols();
    CMatrix a(n, static_cast<Eigen::Index>(freqs.size()));
    for (std::size_t r = 0; r < freqs.size(); ++r) {
        double f = freqs[r];
        if (mode == Projection::NearestBin) f = std::round(f * static_cast<double>(n)) / static_cast<double>(n);
        a.col(static_cast<Eigen::Index>(r)) = steering(n, f);
    }
    if (mode == Projection::JointLeastSquares) return a.colPivHouseholderQr().solve(y.transpose());
    return (a.adjoint() * y.transpose()) / static_cast<double>(n);
}

// Row s of the result is the length-N time vector for angle group s, after SWE removal.
CMatrix project_antenna_axis(const CMatrix& y, const std::vector<double>& angles, double alpha, Projection mode) {
    const Eigen::Index m_count = y.rows();
    const Eigen::Index n_count = y.cols();
    const auto s_count = static_cast<Eigen::Index>(angles.size());
    const int samples = static_cast<int>(n_count);
    CMatrix out(s_count, n_count);

    if (mode == Projection::JointLeastSquares) {
        CMatrix b(m_count, s_count);
        for (Eigen::Index n = 0; n < n_count; ++n) {
            for (Eigen::Index s = 0; s < s_count; ++s) {
                const double w = angles[static_cast<std::size_t>(s)];
                for (Eigen::Index m = 0; m < m_count; ++m)
                    b(m, s) = cis_cycles(w * static_cast<double>(m)) * cis_cycles(sw_cycles(alpha, samples, w, m, n));
            }
            out.col(n) = b.colPivHouseholderQr().solve(y.col(n));
        }
        return out;
    }

    for (Eigen::Index s = 0; s < s_count; ++s) {
        const double w = angles[static_cast<std::size_t>(s)];
        const CMatrix compensated = compensate_swe(y, w, alpha);
        double look = w;
        if (mode == Projection::NearestBin)
            look = std::round(w * static_cast<double>(m_count)) / static_cast<double>(m_count);
        const CVector b = steering(m_count, look);
        out.row(s) = (b.adjoint() * compensated) / static_cast<double>(m_count);
    }
    return out;
}

void sort_and_number(EstimateResult& result, const std::vector<double>& group_freqs) {
    std::vector<std::size_t> order(group_freqs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return group_freqs[a] < group_freqs[b]; });
    std::vector<int> rank(group_freqs.size());
    result.group_frequencies.clear();
    for (std::size_t i = 0; i < order.size(); ++i) {
        rank[order[i]] = static_cast<int>(i);
        result.group_frequencies.push_back(group_freqs[order[i]]);
    }
    for (auto& s : result.signatures) s.group_id = rank[static_cast<std::size_t>(s.group_id)];
}

}  // namespace

Projection parse_projection(std::string_view name) {
    if (name == "joint_ls") return Projection::JointLeastSquares;
    if (name == "matched") return Projection::MatchedSteering;
    if (name == "nearest_bin") return Projection::NearestBin;
    throw std::invalid_argument("unknown projection mode '" + std::string(name) + "'");
}

std::string_view to_string(Projection projection) {
    switch (projection) {
        case Projection::JointLeastSquares: return "joint_ls";
        case Projection::MatchedSteering: return "matched";
        case Projection::NearestBin: return "nearest_bin";
    }
    return "unknown";
}

CMatrix compensate_swe(const CMatrix& y, double omega_theta_hat, double alpha) {
    CMatrix out = y;
    if (alpha * omega_theta_hat == 0.0) return out;
    const int samples = static_cast<int>(y.cols());
    for (Eigen::Index n = 0; n < y.cols(); ++n)
        for (Eigen::Index m = 0; m < y.rows(); ++m)
            out(m, n) *= cis_cycles(-sw_cycles(alpha, samples, omega_theta_hat, m, n));
    return out;
}

IfMatrix compensate_swe(const IfMatrix& y, double omega_theta_hat, double alpha) {
    return IfMatrix{compensate_swe(y.data, omega_theta_hat, alpha), y.params};
}

int max_wideband_snapshots(double alpha, int samples, int elements, double omega_theta_max) {
    // Drift 2 pi (alpha/N) omega M L_w must stay below pi/4.
    const double per_snapshot = 8.0 * alpha * std::abs(omega_theta_max) * elements / samples;
    if (per_snapshot <= 0.0) return samples;
    const double bound = 1.0 / per_snapshot;
    int lw = static_cast<int>(std::ceil(bound)) - 1;
    return std::clamp(lw, 1, samples);
}

std::vector<FrequencyGroup> merge_frequencies(const std::vector<SparseAtom<double>>& atoms, double tolerance,
                                              bool signed_axis) {
    std::vector<FrequencyGroup> groups;
    if (atoms.empty()) return groups;

    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](std::size_t i) { return wrap_unit(atoms[i].frequency); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

    std::vector<std::vector<std::size_t>> chains{{order[0]}};
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (key(order[k]) - key(chains.back().back()) < tolerance) {
            chains.back().push_back(order[k]);
        } else {
            chains.push_back({order[k]});
        }
    }
    // The unit circle closes: the last chain may continue into the first.
    if (chains.size() > 1 && key(chains.front().front()) + 1.0 - key(chains.back().back()) < tolerance) {
        chains.back().insert(chains.back().end(), chains.front().begin(), chains.front().end());
        chains.erase(chains.begin());
    }

    for (const auto& chain : chains) {
        FrequencyGroup g;
        const double base = atoms[chain.front()].frequency;
        double weight_sum = 0.0;
        double offset_sum = 0.0;
        for (std::size_t i : chain) {
            const double w = std::sqrt(atoms[i].energy);
            offset_sum += w * wrap_signed(atoms[i].frequency - base);
            weight_sum += w;
            g.amplitude += atoms[i].coefficient;
            g.members.push_back(atoms[i].frequency);
        }
        const double mean = weight_sum > 0.0 ? base + offset_sum / weight_sum : base;
        g.frequency = signed_axis ? wrap_signed(mean) : wrap_unit(mean);
        groups.push_back(std::move(g));
    }
    std::stable_sort(groups.begin(), groups.end(),
                     [](const auto& a, const auto& b) { return a.frequency < b.frequency; });
    return groups;
}

namespace {

// Re-estimates every pair's range on the time series left after least-squares removal of
// all other detected angles, searching the range grid within +/-window of its group.
void refine_ranges(const CMatrix& y, std::vector<SignatureEstimate>& sigs, const std::vector<double>& group_freqs,
                   const Dict& range_dict, double window, double angle_merge, std::vector<std::string>& diagnostics) {
    if (sigs.empty()) return;
    const Eigen::Index m_count = y.rows();

    // Distinct angles (near-duplicates share one steering vector).
    std::vector<double> angles;
    std::vector<std::size_t> angle_of(sigs.size());
    for (std::size_t k = 0; k < sigs.size(); ++k) {
        std::size_t found = angles.size();
        for (std::size_t a = 0; a < angles.size(); ++a)
            if (circular_distance(angles[a], sigs[k].omega_theta) < angle_merge) found = a;
        if (found == angles.size()) angles.push_back(sigs[k].omega_theta);
        angle_of[k] = found;
    }
    if (static_cast<Eigen::Index>(angles.size()) * 2 > m_count) {
        diagnostics.push_back("pair refinement skipped: too many distinct angles for the aperture");
        return;
    }

    CMatrix b(m_count, static_cast<Eigen::Index>(angles.size()));
    for (std::size_t a = 0; a < angles.size(); ++a) b.col(static_cast<Eigen::Index>(a)) = steering(m_count, angles[a]);
    const CMatrix demixed = b.colPivHouseholderQr().solve(y);  // angles x N

    const auto& atoms = range_dict.atoms();
    for (std::size_t k = 0; k < sigs.size(); ++k) {
        const CVector series = demixed.row(static_cast<Eigen::Index>(angle_of[k])).transpose();
        const double center = group_freqs[static_cast<std::size_t>(sigs[k].group_id)];
        Eigen::Index best = -1;
        double best_score = -1.0;
        for (Eigen::Index g = 0; g < range_dict.size(); ++g) {
            if (circular_distance(range_dict.frequency(g), center) > window) continue;
            const double score = std::norm(atoms.col(g).dot(series));
            if (score > best_score) {
                best_score = score;
                best = g;
            }
        }
        if (best >= 0) sigs[k].omega_r = range_dict.frequency(best);
    }
}

// Joint least-squares amplitudes for the final (angle, range) pairs.
void refit_amplitudes(const CMatrix& y, std::vector<SignatureEstimate>& sigs) {
    if (sigs.empty()) return;
    const Eigen::Index m_count = y.rows();
    const Eigen::Index n_count = y.cols();
    CMatrix atoms(m_count * n_count, static_cast<Eigen::Index>(sigs.size()));
    for (std::size_t k = 0; k < sigs.size(); ++k) {
        const CVector b = steering(m_count, sigs[k].omega_theta);
        const CVector a = steering(n_count, sigs[k].omega_r);
        const CMatrix outer = b * a.transpose();
        atoms.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const CVector>(outer.data(), outer.size());
    }
    const CVector flat = Eigen::Map<const CVector>(y.data(), y.size());
    const CVector amps = atoms.colPivHouseholderQr().solve(flat);
    for (std::size_t k = 0; k < sigs.size(); ++k) sigs[k].amplitude = amps[static_cast<Eigen::Index>(k)];
}

}  // namespace

EstimateResult estimate_narrowband(const IfMatrix& y, const EstimatorConfig& cfg) {
    EstimateResult result;
    const CMatrix& data = y.data;
    const Eigen::Index m_count = data.rows();
    const Eigen::Index n_count = data.cols();
    if (m_count < 2 || n_count < 2) throw std::invalid_argument("estimate_narrowband: need at least 2x2 measurements");
    StageClock clock(result);

    const Dict range_dict(n_count, 0.0, 1.0, cfg.oversampling);
    const Dict angle_dict(m_count, -0.5, 0.5, cfg.oversampling);
    const double range_tol = cfg.merge_tolerance.value_or(0.5 / static_cast<double>(n_count));
    const double angle_tol = cfg.merge_tolerance.value_or(0.5 / static_cast<double>(m_count));

    // Stage 1: fast-time snapshot(s) at the lowest antenna indices.
    const Eigen::Index snaps = std::clamp<Eigen::Index>(cfg.snapshots, 1, m_count);
    const CMatrix first = data.topRows(snaps).transpose();
    const auto rule1 = stage_rule(cfg.first_stage, cfg, true, cfg.noise_sigma,
                                  static_cast<double>(n_count * snaps), first.norm());
    const auto sol1 = omp(first, range_dict, rule1, cfg.omp);
    if (sol1.atoms.empty()) {
        result.diagnostics.push_back("stage 1: no range components (" + describe_stop(sol1) + ")");
        return result;
    }
    if (sol1.stop == OmpStop::IllConditioned) result.diagnostics.push_back("stage 1: " + describe_stop(sol1));

    const auto groups = merge_frequencies(sol1.atoms, range_tol, false);
    clock.lap("stage1");
    std::vector<double> group_freqs;
    for (const auto& g : groups) group_freqs.push_back(g.frequency);

    // Stage 2: spatial vector per range group, then angles.
    const CMatrix spatial = project_time_axis(data, group_freqs, cfg.projection);
    const double noise2 = cfg.noise_sigma / std::sqrt(static_cast<double>(n_count));
    for (std::size_t r = 0; r < groups.size(); ++r) {
        const CVector z = spatial.row(static_cast<Eigen::Index>(r)).transpose();
        const auto rule2 = stage_rule(cfg.second_stage, cfg, false, noise2, static_cast<double>(m_count), z.norm());
        const auto sol2 = omp(z, angle_dict, rule2, cfg.omp);
        if (sol2.atoms.empty()) {
            result.diagnostics.push_back("group " + std::to_string(r) + ": no angular components (" +
                                         describe_stop(sol2) + ")");
            continue;
        }
        if (sol2.stop == OmpStop::IllConditioned)
            result.diagnostics.push_back("group " + std::to_string(r) + ": " + describe_stop(sol2));
        for (const auto& a : merge_frequencies(sol2.atoms, angle_tol, true))
            result.signatures.push_back({a.frequency, group_freqs[r], a.amplitude, static_cast<int>(r)});
    }

    clock.lap("stage2");

    if (cfg.refine_pairs && !result.signatures.empty()) {
        refine_ranges(data, result.signatures, group_freqs, range_dict, range_tol, angle_tol, result.diagnostics);
        refit_amplitudes(data, result.signatures);
        clock.lap("refine");
    }

    sort_and_number(result, group_freqs);
    std::stable_sort(result.signatures.begin(), result.signatures.end(), [](const auto& a, const auto& b) {
        if (a.group_id != b.group_id) return a.group_id < b.group_id;
        return a.omega_theta < b.omega_theta;
    });
    return result;
}

EstimateResult estimate_wideband(const IfMatrix& y, const EstimatorConfig& cfg) {
    EstimateResult result;
    const CMatrix& data = y.data;
    const Eigen::Index m_count = data.rows();
    const Eigen::Index n_count = data.cols();
    if (m_count < 2 || n_count < 2) throw std::invalid_argument("estimate_wideband: need at least 2x2 measurements");
    StageClock clock(result);
    const double alpha = y.params.alpha;

    const Dict range_dict(n_count, 0.0, 1.0, cfg.oversampling);
    const Dict angle_dict(m_count, -0.5, 0.5, cfg.oversampling);
    const double range_tol = cfg.merge_tolerance.value_or(0.5 / static_cast<double>(n_count));
    const double angle_tol = cfg.merge_tolerance.value_or(0.5 / static_cast<double>(m_count));

    // Stage 1: spatial snapshot(s) at the lowest time indices, where the SW term is ~1.
    Eigen::Index snaps = std::clamp<Eigen::Index>(cfg.snapshots, 1, n_count);
    const int snap_cap = max_wideband_snapshots(alpha, static_cast<int>(n_count), static_cast<int>(m_count));
    if (snaps > snap_cap) {
        result.diagnostics.push_back("stage 1: snapshot count reduced from " + std::to_string(snaps) + " to " +
                                     std::to_string(snap_cap) + " to bound the SW phase drift");
        snaps = snap_cap;
    }
    const CMatrix first = data.leftCols(snaps);
    const auto rule1 = stage_rule(cfg.first_stage, cfg, true, cfg.noise_sigma,
                                  static_cast<double>(m_count * snaps), first.norm());
    const auto sol1 = omp(first, angle_dict, rule1, cfg.omp);
    if (sol1.atoms.empty()) {
        result.diagnostics.push_back("stage 1: no angular components (" + describe_stop(sol1) + ")");
        return result;
    }
    if (sol1.stop == OmpStop::IllConditioned) result.diagnostics.push_back("stage 1: " + describe_stop(sol1));

    const auto groups = merge_frequencies(sol1.atoms, angle_tol, true);
    clock.lap("stage1");
    std::vector<double> group_angles;
    for (const auto& g : groups) group_angles.push_back(g.frequency);

    // Stage 2: compensate SWE per angle, collapse the antenna axis, then ranges.
    const CMatrix temporal = project_antenna_axis(data, group_angles, alpha, cfg.projection);
    const double noise2 = cfg.noise_sigma / std::sqrt(static_cast<double>(m_count));
    for (std::size_t s = 0; s < groups.size(); ++s) {
        const CVector z = temporal.row(static_cast<Eigen::Index>(s)).transpose();
        const auto rule2 = stage_rule(cfg.second_stage, cfg, false, noise2, static_cast<double>(n_count), z.norm());
        const auto sol2 = omp(z, range_dict, rule2, cfg.omp);
        if (sol2.atoms.empty()) {
            result.diagnostics.push_back("group " + std::to_string(s) + ": no range components (" +
                                         describe_stop(sol2) + ")");
            continue;
        }
        if (sol2.stop == OmpStop::IllConditioned)
            result.diagnostics.push_back("group " + std::to_string(s) + ": " + describe_stop(sol2));
        for (const auto& r : merge_frequencies(sol2.atoms, range_tol, false))
            result.signatures.push_back({group_angles[s], r.frequency, r.amplitude, static_cast<int>(s)});
    }

    clock.lap("stage2");

    sort_and_number(result, group_angles);
    std::stable_sort(result.signatures.begin(), result.signatures.end(), [](const auto& a, const auto& b) {
        if (a.group_id != b.group_id) return a.group_id < b.group_id;
        return a.omega_r < b.omega_r;
    });
    return result;
}

MatchReport match_signatures(const std::vector<Signature>& truth, const std::vector<SignatureEstimate>& estimates,
                             double tol_theta, double tol_r) {
    if (!(tol_theta >= 0.0) || !(tol_r >= 0.0)) throw std::invalid_argument("match tolerances must be nonnegative");

    auto normalized = [](double err, double tol) {
        if (tol > 0.0) return err / tol;
        return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    };

    struct Candidate {
        double cost;
        std::size_t t;
        std::size_t e;
        double err_theta;
        double err_r;
    };
    std::vector<Candidate> candidates;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        for (std::size_t e = 0; e < estimates.size(); ++e) {
            const double et = circular_distance(truth[t].omega_theta, estimates[e].omega_theta);
            const double er = circular_distance(truth[t].omega_r, estimates[e].omega_r);
            if (et > tol_theta || er > tol_r) continue;
            candidates.push_back({std::max(normalized(et, tol_theta), normalized(er, tol_r)), t, e, et, er});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.t != b.t) return a.t < b.t;
        return a.e < b.e;
    });

    MatchReport report;
    std::vector<bool> used_t(truth.size(), false);
    std::vector<bool> used_e(estimates.size(), false);
    for (const auto& c : candidates) {
        if (used_t[c.t] || used_e[c.e]) continue;
        used_t[c.t] = used_e[c.e] = true;
        report.pairs.push_back({c.t, c.e, c.err_theta, c.err_r});
    }
    std::sort(report.pairs.begin(), report.pairs.end(), [](const auto& a, const auto& b) { return a.truth < b.truth; });
    for (std::size_t t = 0; t < truth.size(); ++t)
        if (!used_t[t]) report.misses.push_back(t);
    for (std::size_t e = 0; e < estimates.size(); ++e)
        if (!used_e[e]) report.false_alarms.push_back(e);

    if (report.pairs.empty()) {
        report.rmse_theta = report.rmse_r = std::numeric_limits<double>::quiet_NaN();
    } else {
        double st = 0.0;
        double sr = 0.0;
        for (const auto& p : report.pairs) {
            st += p.err_theta * p.err_theta;
            sr += p.err_r * p.err_r;
        }
        const auto count = static_cast<double>(report.pairs.size());
        report.rmse_theta = std::sqrt(st / count);
        report.rmse_r = std::sqrt(sr / count);
    }
    return report;
}

}  // namespace xlmimo
