#include "xlmimo/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xlmimo {

std::vector<Cluster> detect_clusters(const MapGrid& map, double rel_threshold) {
    if (!(rel_threshold > 0.0 && rel_threshold < 1.0))
        throw std::invalid_argument("detect_clusters: rel_threshold must lie in (0, 1)");
    std::vector<Cluster> clusters;
    const RMatrix& a = map.data;
    if (a.size() == 0) return clusters;
    const double peak = a.maxCoeff();
    if (!(peak > 0.0)) return clusters;
    const double level = rel_threshold * peak;

    const Eigen::Index rows = a.rows();
    const Eigen::Index cols = a.cols();
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> label =
        Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols, -1);

    std::vector<Bin> stack;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (label(r, c) >= 0 || a(r, c) < level) continue;
            const int id = static_cast<int>(clusters.size());
            Cluster cl;
            label(r, c) = id;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const Bin b = stack.back();
                stack.pop_back();
                cl.members.push_back(b);
                for (Eigen::Index dr = -1; dr <= 1; ++dr) {
                    for (Eigen::Index dc = -1; dc <= 1; ++dc) {
                        const Eigen::Index rr = b.row + dr;
                        const Eigen::Index cc = b.col + dc;
                        if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
                        if (label(rr, cc) >= 0 || a(rr, cc) < level) continue;
                        label(rr, cc) = id;
                        stack.push_back({rr, cc});
                    }
                }
            }
            std::sort(cl.members.begin(), cl.members.end(),
                      [](const Bin& x, const Bin& y) { return x.row != y.row ? x.row < y.row : x.col < y.col; });
            double w = 0.0;
            cl.peak = cl.members.front();
            cl.peak_magnitude = a(cl.peak.row, cl.peak.col);
            for (const Bin& b : cl.members) {
                const double v = a(b.row, b.col);
                if (v > cl.peak_magnitude) {
                    cl.peak = b;
                    cl.peak_magnitude = v;
                }
                w += v;
                cl.centroid_row += v * static_cast<double>(b.row);
                cl.centroid_col += v * static_cast<double>(b.col);
            }
            cl.centroid_row /= w;
            cl.centroid_col /= w;
            clusters.push_back(std::move(cl));
        }
    }
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const Cluster& x, const Cluster& y) { return x.peak_magnitude > y.peak_magnitude; });
    return clusters;
}

std::vector<SignatureEstimate> peaks_to_signatures(const std::vector<Cluster>& clusters, const MapGrid& map) {
    if (map.row_axis != MapAxis::AngleBin || map.col_axis != MapAxis::RangeBin)
        throw std::invalid_argument("peaks_to_signatures: needs a range-angle map");
    std::vector<SignatureEstimate> out;
    out.reserve(clusters.size());
    // A unit on-grid tone peaks at sqrt(M N) in the unitary 2D transform.
    const double gain = std::sqrt(static_cast<double>(map.rows() * map.cols()));
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const Bin& p = clusters[i].peak;
        SignatureEstimate s;
        s.omega_theta = wrap_signed(static_cast<double>(p.row) * map.row_scale);
        s.omega_r = static_cast<double>(p.col) * map.col_scale;
        s.amplitude = clusters[i].peak_magnitude / gain;
        s.group_id = static_cast<int>(i);
        out.push_back(s);
    }
    return out;
}

BaselineResult run_baseline(const IfMatrix& y, double rel_threshold) {
    BaselineResult r;
    r.map = range_angle_map(y.data);
    r.clusters = detect_clusters(r.map, rel_threshold);
    r.signatures = peaks_to_signatures(r.clusters, r.map);
    return r;
}

}  // namespace xlmimo
