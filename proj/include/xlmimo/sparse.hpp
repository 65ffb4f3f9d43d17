#pragma once

#include "xlmimo/types.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xlmimo {

class DictionaryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Uniform frequency grid over [lo, hi) with oversampling relative to the signal length.
template <typename Real>
struct FreqGrid {
    std::vector<Real> points;
    Real lo = 0;
    Real hi = 1;
    int oversampling = 1;

    Eigen::Index size() const { return static_cast<Eigen::Index>(points.size()); }
    Real step() const { return (hi - lo) / static_cast<Real>(points.size()); }
    /// The grid covers a full period, so index arithmetic wraps.
    bool periodic() const { return std::abs((hi - lo) - Real(1)) < Real(1e-12); }
};

/// Overcomplete steering dictionary; column g is [1, e^{j2pi w_g}, ..., e^{j2pi w_g (L-1)}]^T,
/// optionally scaled to unit norm.
template <typename Real>
class Dictionary {
public:
    static constexpr Eigen::Index kDefaultMaxColumns = Eigen::Index(1) << 20;

    Dictionary(Eigen::Index length, Real f_lo, Real f_hi, int oversampling, bool normalized = true,
               Eigen::Index max_columns = kDefaultMaxColumns)
        : normalized_(normalized) {
        if (length < 2) throw DictionaryError("dictionary: signal length must be at least 2");
        if (oversampling < 1) throw DictionaryError("dictionary: oversampling must be at least 1");
        if (!(f_lo < f_hi)) throw DictionaryError("dictionary: need f_lo < f_hi");
        const double span = static_cast<double>(f_hi - f_lo);
        const double want = std::ceil(static_cast<double>(oversampling) * static_cast<double>(length) * span - 1e-9);
        if (want > static_cast<double>(max_columns))
            throw DictionaryError("dictionary: " + std::to_string(static_cast<long long>(want)) +
                                  " grid points exceed the cap of " + std::to_string(max_columns));
        const auto columns = static_cast<Eigen::Index>(want);

        grid_.lo = f_lo;
        grid_.hi = f_hi;
        grid_.oversampling = oversampling;
        grid_.points.resize(static_cast<std::size_t>(columns));
        for (Eigen::Index g = 0; g < columns; ++g)
            grid_.points[static_cast<std::size_t>(g)] =
                f_lo + (f_hi - f_lo) * static_cast<Real>(g) / static_cast<Real>(columns);

        const Real scale = normalized ? Real(1) / std::sqrt(static_cast<Real>(length)) : Real(1);
        atoms_.resize(length, columns);
        for (Eigen::Index g = 0; g < columns; ++g) {
            const Real w = grid_.points[static_cast<std::size_t>(g)];
            for (Eigen::Index l = 0; l < length; ++l) atoms_(l, g) = scale * cis_cycles(w * static_cast<Real>(l));
        }
        column_norm_ = normalized ? Real(1) : std::sqrt(static_cast<Real>(length));
        steps_per_bin_ = std::max<Eigen::Index>(
            1, static_cast<Eigen::Index>(std::lround(static_cast<double>(columns) /
                                                     (static_cast<double>(length) * span))));
    }

    const CMatrixX<Real>& atoms() const { return atoms_; }
    const FreqGrid<Real>& grid() const { return grid_; }
    bool normalized() const { return normalized_; }
    Eigen::Index length() const { return atoms_.rows(); }
    Eigen::Index size() const { return atoms_.cols(); }
    Real frequency(Eigen::Index g) const { return grid_.points[static_cast<std::size_t>(g)]; }
    /// Norm of every stored column (1 when normalized, sqrt(L) otherwise).
    Real column_norm() const { return column_norm_; }
    /// Grid steps per natural resolution bin 1/L.
    Eigen::Index steps_per_bin() const { return steps_per_bin_; }

    /// Grid index `offset` steps away from g; wraps on periodic grids.
    std::optional<Eigen::Index> neighbor(Eigen::Index g, Eigen::Index offset) const {
        const Eigen::Index n = size();
        Eigen::Index k = g + offset;
        if (grid_.periodic()) return ((k % n) + n) % n;
        if (k < 0 || k >= n) return std::nullopt;
        return k;
    }

    /// Index distance between two grid points (circular on periodic grids).
    Eigen::Index index_distance(Eigen::Index a, Eigen::Index b) const {
        const Eigen::Index d = std::abs(a - b);
        return grid_.periodic() ? std::min(d, size() - d) : d;
    }

    /// Raw steering vector at an arbitrary frequency (not restricted to the grid).
    CVectorX<Real> steering(Real frequency) const {
        CVectorX<Real> v(length());
        for (Eigen::Index l = 0; l < length(); ++l) v[l] = cis_cycles(frequency * static_cast<Real>(l));
        return v;
    }

private:
    CMatrixX<Real> atoms_;
    FreqGrid<Real> grid_;
    bool normalized_ = true;
    Real column_norm_ = 1;
    Eigen::Index steps_per_bin_ = 1;
};

template <typename Real>
Dictionary<Real> build_dictionary(Eigen::Index length, Real f_lo, Real f_hi, int oversampling,
                                  Eigen::Index max_columns = Dictionary<Real>::kDefaultMaxColumns) {
    return Dictionary<Real>(length, f_lo, f_hi, oversampling, true, max_columns);
}

/// Known sparsity, relative residual threshold (||r|| <= eps ||y||), or both; whichever fires first.
template <typename Real>
struct StopRule {
    std::optional<std::size_t> max_atoms;
    std::optional<Real> rel_residual;
};

template <typename Real>
struct SparseSolution;

template <typename Real>
struct OmpOptions {
    /// On-grid support refinement after each selection: single-atom moves within one
    /// natural bin, then joint moves of atom pairs closer than two bins.
    bool refine_support = true;
    int max_refine_cycles = 16;
    int pair_window = 3;
    Real max_condition = Real(1e8);
    /// Called with every finished solution (auditing hook).
    std::function<void(const SparseSolution<Real>&)> observer;
};

enum class OmpStop { ZeroInput, MaxAtoms, ResidualThreshold, ExactFit, Exhausted, IllConditioned };

std::string_view to_string(OmpStop reason);

template <typename Real>
struct SparseAtom {
    Eigen::Index index = 0;
    Real frequency = 0;
    /// Coefficient against the raw (unit-modulus entry) steering vector, first snapshot.
    std::complex<Real> coefficient{};
    /// Sum over snapshots of |coefficient|^2.
    Real energy = 0;
};

template <typename Real>
struct SparseSolution {
    std::vector<SparseAtom<Real>> atoms;  ///< sorted by energy, descending
    Real residual_norm = 0;
    std::size_t iterations = 0;
    std::vector<Real> residual_history;   ///< ||y|| then the residual after each iteration
    OmpStop stop = OmpStop::ZeroInput;
    std::string diagnostic;
};

namespace detail {

template <typename Real>
struct LsFit {
    CMatrixX<Real> coefficients;  // k x S against stored columns
    CMatrixX<Real> residual;      // L x S
    Real residual_norm = 0;
};

template <typename Real>
CMatrixX<Real> gather(const CMatrixX<Real>& atoms, const std::vector<Eigen::Index>& support) {
    CMatrixX<Real> out(atoms.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = atoms.col(support[i]);
    return out;
}

template <typename Real>
LsFit<Real> least_squares(const CMatrixX<Real>& atoms, const std::vector<Eigen::Index>& support,
                          const CMatrixX<Real>& y) {
    LsFit<Real> fit;
    const CMatrixX<Real> sub = gather(atoms, support);
    fit.coefficients = sub.colPivHouseholderQr().solve(y);
    fit.residual = y - sub * fit.coefficients;
    fit.residual_norm = fit.residual.norm();
    return fit;
}

template <typename Real>
Real condition_number(const CMatrixX<Real>& atoms, const std::vector<Eigen::Index>& support) {
    Eigen::JacobiSVD<CMatrixX<Real>> svd(gather(atoms, support));
    const auto& s = svd.singularValues();
    const Real smallest = s[s.size() - 1];
    return smallest > Real(0) ? s[0] / smallest : std::numeric_limits<Real>::infinity();
}

inline bool contains(const std::vector<Eigen::Index>& v, Eigen::Index x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

// Best single-atom replacement for support[i] within one bin, judged by the exact
// least-squares residual. Returns the replacement index when it strictly improves.
template <typename Real>
std::optional<Eigen::Index> best_single_move(const Dictionary<Real>& dict, const std::vector<Eigen::Index>& support,
                                             std::size_t i, const CMatrixX<Real>& y, Real current_norm) {
    const auto& atoms = dict.atoms();
    std::vector<Eigen::Index> others;
    for (std::size_t j = 0; j < support.size(); ++j)
        if (j != i) others.push_back(support[j]);

    CMatrixX<Real> basis;  // orthonormal basis of the other atoms
    CMatrixX<Real> rest = y;
    if (!others.empty()) {
        const CMatrixX<Real> sub = gather(atoms, others);
        Eigen::HouseholderQR<CMatrixX<Real>> qr(sub);
        basis = qr.householderQ() * CMatrixX<Real>::Identity(sub.rows(), sub.cols());
        rest -= basis * (basis.adjoint() * y);
    }
    const Real rest_sq = rest.squaredNorm();

    std::optional<Eigen::Index> best;
    Real best_sq = current_norm * current_norm * (Real(1) - Real(2e-12));
    const Eigen::Index reach = dict.steps_per_bin();
    for (Eigen::Index off = -reach; off <= reach; ++off) {
        if (off == 0) continue;
        const auto g = dict.neighbor(support[i], off);
        if (!g || contains(support, *g)) continue;
        CVectorX<Real> u = atoms.col(*g);
        if (basis.size() > 0) u -= basis * (basis.adjoint() * u);
        const Real uu = u.squaredNorm();
        if (uu <= std::numeric_limits<Real>::epsilon()) continue;
        const Real captured = (u.adjoint() * rest).squaredNorm() / uu;
        const Real candidate_sq = rest_sq - captured;
        if (candidate_sq < best_sq) {
            best_sq = candidate_sq;
            best = *g;
        }
    }
    return best;
}

template <typename Real>
bool refine_support(const Dictionary<Real>& dict, std::vector<Eigen::Index>& support, LsFit<Real>& fit,
                    const CMatrixX<Real>& y, const OmpOptions<Real>& opt) {
    const auto& atoms = dict.atoms();
    bool any = false;
    for (int cycle = 0; cycle < opt.max_refine_cycles; ++cycle) {
        bool changed = false;
        for (std::size_t i = 0; i < support.size(); ++i) {
            const auto move = best_single_move(dict, support, i, y, fit.residual_norm);
            if (!move) continue;
            auto candidate = support;
            candidate[i] = *move;
            auto cfit = least_squares(atoms, candidate, y);
            if (cfit.residual_norm < fit.residual_norm * (Real(1) - Real(1e-12))) {
                support = std::move(candidate);
                fit = std::move(cfit);
                changed = true;
            }
        }
        if (!changed && opt.pair_window > 0) {
            const Eigen::Index close = 2 * dict.steps_per_bin();
            for (std::size_t i = 0; i < support.size() && !changed; ++i) {
                for (std::size_t j = i + 1; j < support.size() && !changed; ++j) {
                    if (dict.index_distance(support[i], support[j]) > close) continue;
                    std::optional<std::vector<Eigen::Index>> best;
                    LsFit<Real> best_fit;
                    Real best_norm = fit.residual_norm * (Real(1) - Real(1e-12));
                    for (int a = -opt.pair_window; a <= opt.pair_window; ++a) {
                        for (int b = -opt.pair_window; b <= opt.pair_window; ++b) {
                            if (a == 0 || b == 0) continue;
                            const auto gi = dict.neighbor(support[i], a);
                            const auto gj = dict.neighbor(support[j], b);
                            if (!gi || !gj || *gi == *gj) continue;
                            auto candidate = support;
                            candidate[i] = *gi;
                            candidate[j] = *gj;
                            bool clash = false;
                            for (std::size_t k = 0; k < candidate.size(); ++k)
                                if (k != i && k != j && (candidate[k] == *gi || candidate[k] == *gj)) clash = true;
                            if (clash) continue;
                            auto cfit = least_squares(atoms, candidate, y);
                            if (cfit.residual_norm < best_norm) {
                                best_norm = cfit.residual_norm;
                                best = std::move(candidate);
                                best_fit = std::move(cfit);
                            }
                        }
                    }
                    if (best) {
                        support = std::move(*best);
                        fit = std::move(best_fit);
                        changed = true;
                    }
                }
            }
        }
        if (!changed) break;
        any = true;
    }
    return any;
}

}  // namespace detail

/// Orthogonal matching pursuit over a steering dictionary.
///
/// `y` is L x S: one column per snapshot sharing a common support (S = 1 is plain OMP).
/// Every iteration selects the atom with the largest correlation energy against the
/// residual (lowest grid index on ties), refits least squares over the whole support and,
/// when enabled, refines the support on the grid. The residual never increases.
template <typename Derived, typename Real>
SparseSolution<Real> omp(const Eigen::MatrixBase<Derived>& y_in, const Dictionary<Real>& dict,
                         const StopRule<Real>& stop, const OmpOptions<Real>& opt = {}) {
    const CMatrixX<Real> y = y_in.template cast<std::complex<Real>>();
    if (y.size() == 0) throw std::invalid_argument("omp: empty measurement");
    if (y.rows() != dict.length())
        throw std::invalid_argument("omp: measurement length " + std::to_string(y.rows()) +
                                    " does not match dictionary length " + std::to_string(dict.length()));

    SparseSolution<Real> sol;
    const Real norm_y = y.norm();
    sol.residual_history.push_back(norm_y);
    if (norm_y == Real(0)) {
        sol.stop = OmpStop::ZeroInput;
        if (opt.observer) opt.observer(sol);
        return sol;
    }

    const auto& atoms = dict.atoms();
    const Real exact_tol = Real(1e3) * std::numeric_limits<Real>::epsilon() * norm_y;
    const auto capacity = static_cast<std::size_t>(std::min(dict.length(), dict.size()));

    std::vector<Eigen::Index> support;
    detail::LsFit<Real> fit;
    fit.residual = y;
    fit.residual_norm = norm_y;

    while (true) {
        if (stop.max_atoms && support.size() >= *stop.max_atoms) {
            sol.stop = OmpStop::MaxAtoms;
            break;
        }
        if (stop.rel_residual && fit.residual_norm <= *stop.rel_residual * norm_y) {
            sol.stop = OmpStop::ResidualThreshold;
            break;
        }
        if (fit.residual_norm <= exact_tol) {
            sol.stop = OmpStop::ExactFit;
            break;
        }
        if (support.size() >= capacity) {
            sol.stop = OmpStop::Exhausted;
            break;
        }

        const RVectorX<Real> score = (atoms.adjoint() * fit.residual).rowwise().squaredNorm();
        Eigen::Index pick = -1;
        for (Eigen::Index g = 0; g < score.size(); ++g) {
            if (detail::contains(support, g)) continue;
            if (pick < 0 || score[g] > score[pick]) pick = g;
        }
        support.push_back(pick);

        const Real cond = detail::condition_number(atoms, support);
        if (!(cond <= opt.max_condition)) {
            support.pop_back();
            sol.stop = OmpStop::IllConditioned;
            sol.diagnostic = "selected-atom subsystem condition number " + std::to_string(static_cast<double>(cond)) +
                             " exceeds " + std::to_string(static_cast<double>(opt.max_condition));
            break;
        }

        fit = detail::least_squares(atoms, support, y);
        if (opt.refine_support) detail::refine_support(dict, support, fit, y, opt);

        ++sol.iterations;
        sol.residual_history.push_back(fit.residual_norm);
    }

    sol.residual_norm = fit.residual_norm;
    // Stored columns are raw steering vectors divided by column_norm / sqrt(L).
    const Real raw_scale = dict.column_norm() / std::sqrt(static_cast<Real>(dict.length()));
    for (std::size_t i = 0; i < support.size(); ++i) {
        SparseAtom<Real> a;
        a.index = support[i];
        a.frequency = dict.frequency(support[i]);
        const auto row = fit.coefficients.row(static_cast<Eigen::Index>(i));
        a.coefficient = row(0) * raw_scale;
        a.energy = row.squaredNorm() * raw_scale * raw_scale;
        sol.atoms.push_back(a);
    }
    std::stable_sort(sol.atoms.begin(), sol.atoms.end(), [](const auto& a, const auto& b) {
        if (a.energy != b.energy) return a.energy > b.energy;
        return a.index < b.index;
    });
    if (opt.observer) opt.observer(sol);
    return sol;
}

}  // namespace xlmimo
