#pragma once

// Reference computations written directly from the defining formulas, kept
// independent of the library's algorithms.

#include "xlmimo/model.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

inline cd cis(double cycles) {
    const double r = std::fmod(cycles, 1.0);
    return std::polar(1.0, 2.0 * std::numbers::pi * r);
}

/// Element (m, n) of a single-target matrix, straight from the model equations.
inline cd element(double omega_theta, double omega_r, cd amplitude, double alpha, int samples, long m, long n) {
    const double sw = alpha / samples * omega_theta * static_cast<double>(m) * static_cast<double>(n);
    return amplitude * cis(omega_r * n) * cis(omega_theta * m) * cis(sw);
}

inline xlmimo::CMatrix matrix(const std::vector<xlmimo::Signature>& sigs, double alpha, int elements, int samples) {
    xlmimo::CMatrix y = xlmimo::CMatrix::Zero(elements, samples);
    for (const auto& s : sigs)
        for (long m = 0; m < elements; ++m)
            for (long n = 0; n < samples; ++n)
                y(m, n) += element(s.omega_theta, s.omega_r, s.amplitude, alpha, samples, m, n);
    return y;
}

/// Direct O(L^2) unitary DFT of a vector, analysis kernel.
inline std::vector<cd> dft(const std::vector<cd>& x) {
    const auto L = x.size();
    std::vector<cd> out(L);
    for (std::size_t q = 0; q < L; ++q) {
        cd acc = 0.0;
        for (std::size_t l = 0; l < L; ++l) acc += x[l] * cis(-static_cast<double>(q * l % L) / static_cast<double>(L));
        out[q] = acc / std::sqrt(static_cast<double>(L));
    }
    return out;
}

/// (1/sqrt(L)) sum_l exp(j 2 pi l x) by brute force.
inline cd dirichlet_sum(int L, double x) {
    cd acc = 0.0;
    for (int l = 0; l < L; ++l) acc += cis(x * l);
    return acc / std::sqrt(static_cast<double>(L));
}

inline xlmimo::CVector tone(int L, double f) {
    xlmimo::CVector v(L);
    for (int l = 0; l < L; ++l) v[l] = cis(f * l);
    return v;
}

/// Least-squares coefficients of y on raw steering vectors at the given frequencies.
inline xlmimo::CVector ls_coefficients(const xlmimo::CVector& y, const std::vector<double>& freqs) {
    xlmimo::CMatrix a(y.size(), static_cast<Eigen::Index>(freqs.size()));
    for (std::size_t k = 0; k < freqs.size(); ++k)
        a.col(static_cast<Eigen::Index>(k)) = tone(static_cast<int>(y.size()), freqs[k]);
    return a.colPivHouseholderQr().solve(y);
}

struct GridPair {
    long p = 0;  // angle grid index
    long q = 0;  // range grid index
    cd amplitude;
};

/// Greedy 2D matching pursuit with least-squares refit over the full Kronecker grid
/// (angle grid g/G_theta - 0.5, range grid g/G_r). Exhaustive search of every
/// (p, q) pair at every step; K steps.
inline std::vector<GridPair> kronecker_omp(const xlmimo::CMatrix& y, int oversampling, int K) {
    const long M = y.rows();
    const long N = y.cols();
    const long Gt = oversampling * M;
    const long Gr = oversampling * N;
    xlmimo::CMatrix At(M, Gt);
    xlmimo::CMatrix Ar(N, Gr);
    for (long g = 0; g < Gt; ++g) At.col(g) = tone(static_cast<int>(M), static_cast<double>(g) / Gt - 0.5);
    for (long g = 0; g < Gr; ++g) Ar.col(g) = tone(static_cast<int>(N), static_cast<double>(g) / Gr);

    std::vector<GridPair> chosen;
    xlmimo::CMatrix residual = y;
    for (int k = 0; k < K; ++k) {
        const xlmimo::CMatrix corr = At.adjoint() * residual * Ar.conjugate();
        long bp = 0;
        long bq = 0;
        double best = -1.0;
        for (long p = 0; p < Gt; ++p)
            for (long q = 0; q < Gr; ++q)
                if (std::norm(corr(p, q)) > best) {
                    best = std::norm(corr(p, q));
                    bp = p;
                    bq = q;
                }
        chosen.push_back({bp, bq, 0.0});

        xlmimo::CMatrix atoms(M * N, static_cast<Eigen::Index>(chosen.size()));
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            const xlmimo::CMatrix outer = At.col(chosen[i].p) * Ar.col(chosen[i].q).transpose();
            atoms.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const xlmimo::CVector>(outer.data(), outer.size());
        }
        const xlmimo::CVector flat = Eigen::Map<const xlmimo::CVector>(y.data(), y.size());
        const xlmimo::CVector coef = atoms.colPivHouseholderQr().solve(flat);
        const xlmimo::CVector r = flat - atoms * coef;
        residual = Eigen::Map<const xlmimo::CMatrix>(r.data(), M, N);
        for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i].amplitude = coef[static_cast<Eigen::Index>(i)];
    }
    return chosen;
}

/// Circular distance on the unit period.
inline double circ(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 1.0);
    return std::min(d, 1.0 - d);
}

}  // namespace oracle
