#pragma once

#include "xlmimo/estimate.hpp"
#include "xlmimo/spectral.hpp"

#include <vector>

namespace xlmimo {

/// Threshold (fraction of the map maximum) the cluster detector ships with.
inline constexpr double kDefaultClusterThreshold = 0.3;

struct Bin {
    Eigen::Index row = 0;
    Eigen::Index col = 0;

    friend bool operator==(const Bin&, const Bin&) = default;
};

/// One 8-connected component of above-threshold bins.
struct Cluster {
    std::vector<Bin> members;  ///< row-major order
    Bin peak;
    double peak_magnitude = 0.0;
    double centroid_row = 0.0;  ///< magnitude-weighted, fractional bins
    double centroid_col = 0.0;
};

/// Binarizes the map at rel_threshold * max and labels 8-connected components
/// (no wraparound at the map edges). Sorted by peak magnitude, descending.
std::vector<Cluster> detect_clusters(const MapGrid& map, double rel_threshold = kDefaultClusterThreshold);

/// Naive conversion of each cluster peak to normalized frequencies, without any
/// wideband correction. Needs an angle-bin by range-bin map.
std::vector<SignatureEstimate> peaks_to_signatures(const std::vector<Cluster>& clusters, const MapGrid& map);

struct BaselineResult {
    MapGrid map;
    std::vector<Cluster> clusters;
    std::vector<SignatureEstimate> signatures;
};

/// Range-angle map, clustering, peak read-out.
BaselineResult run_baseline(const IfMatrix& y, double rel_threshold = kDefaultClusterThreshold);

}  // namespace xlmimo
