#pragma once

#include "xlmimo/types.hpp"

#include <stdexcept>
#include <string_view>
#include <vector>

namespace xlmimo {

/// Normalized geometric phase sum (1/sqrt(L)) sum_l exp(j 2 pi l x).
///
/// Periodic in x with period 1; magnitude sqrt(L) on the integers.
template <typename Real>
std::complex<Real> dirichlet(Eigen::Index length, Real x) {
    if (length < 1) throw std::invalid_argument("dirichlet: length must be at least 1");
    const Real r = x - std::round(x);
    const Real root = std::sqrt(static_cast<Real>(length));
    if (r == Real(0)) return {root, Real(0)};
    const Real pi = std::numbers::pi_v<Real>;
    const Real ratio = std::sin(pi * length * r) / std::sin(pi * r);
    return std::polar(ratio / root, pi * r * static_cast<Real>(length - 1));
}

enum class Axis {
    Antenna,  ///< along m, i.e. every column is transformed
    Time,     ///< along n, i.e. every row is transformed
};

enum class DftDirection { Analysis, Synthesis };

/// Unitary L-point DFT matrix; analysis kernel exp(-j 2 pi q l / L) / sqrt(L).
template <typename Real>
CMatrixX<Real> dft_matrix(Eigen::Index length, DftDirection direction = DftDirection::Analysis) {
    CMatrixX<Real> f(length, length);
    const Real scale = Real(1) / std::sqrt(static_cast<Real>(length));
    const Real sign = direction == DftDirection::Analysis ? Real(-1) : Real(1);
    for (Eigen::Index q = 0; q < length; ++q)
        for (Eigen::Index l = 0; l < length; ++l) {
            // Exact integer reduction of q*l keeps the twiddles accurate for large L.
            const Eigen::Index k = (q * l) % length;
            const Real angle = sign * kTwoPi<Real> * static_cast<Real>(k) / static_cast<Real>(length);
            f(q, l) = scale * std::polar(Real(1), angle);
        }
    return f;
}

/// Unitary DFT of y along one axis. Parseval holds exactly up to rounding.
template <typename Derived>
auto dft_axis(const Eigen::MatrixBase<Derived>& y, Axis axis, DftDirection direction = DftDirection::Analysis) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    CMatrixX<Real> out;
    if (axis == Axis::Antenna) {
        out.noalias() = dft_matrix<Real>(y.rows(), direction) * y;
    } else {
        out.noalias() = y * dft_matrix<Real>(y.cols(), direction).transpose();
    }
    return out;
}

/// Two-dimensional unitary DFT (antenna axis, then time axis).
template <typename Derived>
auto dft_2d(const Eigen::MatrixBase<Derived>& y) {
    return dft_axis(dft_axis(y, Axis::Antenna), Axis::Time);
}

enum class MapAxis { AngleBin, RangeBin, AntennaIndex, TimeIndex };

std::string_view to_string(MapAxis axis);

/// Real magnitude map over (row, column) bins with the frequency spacing of each axis.
struct MapGrid {
    RMatrix data;
    MapAxis row_axis = MapAxis::AngleBin;
    MapAxis col_axis = MapAxis::RangeBin;
    double row_scale = 1.0;  ///< normalized frequency (or index) per row bin
    double col_scale = 1.0;

    Eigen::Index rows() const { return data.rows(); }
    Eigen::Index cols() const { return data.cols(); }
};

enum class MapView { RangeAngle, AngleTime, RangeAntenna };

MapView parse_map_view(std::string_view name);
std::string_view to_string(MapView view);

/// |DFT over antennas| as (angle bin p, time n).
MapGrid angle_time_map(const CMatrix& y);
/// |DFT over time| as (antenna m, range bin q).
MapGrid range_antenna_map(const CMatrix& y);
/// |2D DFT| as (angle bin p, range bin q).
MapGrid range_angle_map(const CMatrix& y);

MapGrid make_map(const CMatrix& y, MapView view);

/// Per-column argmax row (lowest index wins ties).
std::vector<Eigen::Index> column_peaks(const RMatrix& map);
/// Per-row argmax column (lowest index wins ties).
std::vector<Eigen::Index> row_peaks(const RMatrix& map);

/// Number of bins along each axis whose max-projection reaches max/sqrt(2).
struct SpreadExtent {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
};
SpreadExtent half_power_extent(const MapGrid& map);

}  // namespace xlmimo
