#pragma once

#include "xlmimo/estimate.hpp"
#include "xlmimo/spectral.hpp"
#include "xlmimo/synth.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace xlmimo {

/// `m,n,re,im` header, one row per element, antenna-major. Values print in their
/// shortest round-trip form, so parse_matrix_csv recovers the matrix bit for bit.
std::string format_matrix_csv(const CMatrix& y);

/// Inverse of format_matrix_csv; every (m, n) of the implied M x N grid must appear once.
/// Lines starting with `#` are skipped. Throws ConfigError on malformed input.
CMatrix parse_matrix_csv(std::string_view text, std::string_view source = "<matrix>");

/// `row,col,magnitude` preceded by `#` metadata lines.
std::string format_map_csv(const MapGrid& map, const std::vector<std::string>& header = {});

/// `group_id,omega_theta,omega_r,amp_re,amp_im`.
std::string format_signatures_csv(const std::vector<SignatureEstimate>& signatures);

}  // namespace xlmimo
