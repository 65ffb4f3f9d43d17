#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <complex>
#include <numbers>

namespace xlmimo {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrixX = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CVectorX = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RMatrixX = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RVectorX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using cdouble = std::complex<double>;
using CMatrix = CMatrixX<double>;
using CVector = CVectorX<double>;
using RMatrix = RMatrixX<double>;
using RVector = RVectorX<double>;

template <typename Real>
inline constexpr Real kTwoPi = Real(2) * std::numbers::pi_v<Real>;

/// Reduces a normalized frequency to [0, 1).
template <typename Real>
inline Real wrap_unit(Real f) {
    Real w = f - std::floor(f);
    return w >= Real(1) ? Real(0) : w;
}

/// Reduces a normalized frequency to [-0.5, 0.5).
template <typename Real>
inline Real wrap_signed(Real f) {
    return wrap_unit(f + Real(0.5)) - Real(0.5);
}

/// Distance between two normalized frequencies on the unit circle.
template <typename Real>
inline Real circular_distance(Real a, Real b) {
    return std::abs(wrap_signed(a - b));
}

/// exp(j 2 pi cycles), reducing the argument first so large phases keep precision.
template <typename Real>
inline std::complex<Real> cis_cycles(Real cycles) {
    const Real r = cycles - std::round(cycles);
    return std::polar(Real(1), kTwoPi<Real> * r);
}

}  // namespace xlmimo
