#include "xlmimo/spectral.hpp"

#include <string>

namespace xlmimo {

std::string_view to_string(MapAxis axis) {
    switch (axis) {
        case MapAxis::AngleBin: return "angle_bin";
        case MapAxis::RangeBin: return "range_bin";
        case MapAxis::AntennaIndex: return "antenna_index";
        case MapAxis::TimeIndex: return "time_index";
    }
    return "unknown";
}

MapView parse_map_view(std::string_view name) {
    if (name == "range_angle") return MapView::RangeAngle;
    if (name == "angle_time") return MapView::AngleTime;
    if (name == "range_antenna") return MapView::RangeAntenna;
    throw std::invalid_argument("unknown map view '" + std::string(name) + "'");
}

std::string_view to_string(MapView view) {
    switch (view) {
        case MapView::RangeAngle: return "range_angle";
        case MapView::AngleTime: return "angle_time";
        case MapView::RangeAntenna: return "range_antenna";
    }
    return "unknown";
}

MapGrid angle_time_map(const CMatrix& y) {
    MapGrid g;
    g.data = dft_axis(y, Axis::Antenna).cwiseAbs();
    g.row_axis = MapAxis::AngleBin;
    g.col_axis = MapAxis::TimeIndex;
    g.row_scale = 1.0 / static_cast<double>(y.rows());
    return g;
}

MapGrid range_antenna_map(const CMatrix& y) {
    MapGrid g;
    g.data = dft_axis(y, Axis::Time).cwiseAbs();
    g.row_axis = MapAxis::AntennaIndex;
    g.col_axis = MapAxis::RangeBin;
    g.col_scale = 1.0 / static_cast<double>(y.cols());
    return g;
}

MapGrid range_angle_map(const CMatrix& y) {
    MapGrid g;
    g.data = dft_2d(y).cwiseAbs();
    g.row_axis = MapAxis::AngleBin;
    g.col_axis = MapAxis::RangeBin;
    g.row_scale = 1.0 / static_cast<double>(y.rows());
    g.col_scale = 1.0 / static_cast<double>(y.cols());
    return g;
}

MapGrid make_map(const CMatrix& y, MapView view) {
    switch (view) {
        case MapView::RangeAngle: return range_angle_map(y);
        case MapView::AngleTime: return angle_time_map(y);
        case MapView::RangeAntenna: return range_antenna_map(y);
    }
    throw std::invalid_argument("unknown map view");
}

std::vector<Eigen::Index> column_peaks(const RMatrix& map) {
    std::vector<Eigen::Index> peaks(static_cast<std::size_t>(map.cols()), 0);
    for (Eigen::Index c = 0; c < map.cols(); ++c) {
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < map.rows(); ++r)
            if (map(r, c) > map(best, c)) best = r;
        peaks[static_cast<std::size_t>(c)] = best;
    }
    return peaks;
}

std::vector<Eigen::Index> row_peaks(const RMatrix& map) {
    std::vector<Eigen::Index> peaks(static_cast<std::size_t>(map.rows()), 0);
    for (Eigen::Index r = 0; r < map.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < map.cols(); ++c)
            if (map(r, c) > map(r, best)) best = c;
        peaks[static_cast<std::size_t>(r)] = best;
    }
    return peaks;
}

SpreadExtent half_power_extent(const MapGrid& map) {
    SpreadExtent e;
    if (map.data.size() == 0) return e;
    const double threshold = map.data.maxCoeff() / std::numbers::sqrt2;
    if (threshold <= 0.0) return e;
    const RVector row_max = map.data.rowwise().maxCoeff();
    const RVector col_max = map.data.colwise().maxCoeff().transpose();
    e.rows = (row_max.array() >= threshold).count();
    e.cols = (col_max.array() >= threshold).count();
    return e;
}

}  // namespace xlmimo
