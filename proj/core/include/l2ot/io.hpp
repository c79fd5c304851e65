#pragma once

#include <cstdint>
#include <string>

#include "l2ot/cloud.hpp"

namespace l2ot {

/// Point-cloud CSV: one point per row, d columns, optional header (detected
/// by a non-numeric first line). Parse failures raise ParseError with the
/// 1-based line number.
PointCloud read_cloud_csv(const std::string& path);
void write_cloud_csv(const std::string& path, const PointCloud& cloud);

/// Correspondence CSV: 2d columns per row, target y^(k) first then source
/// x^(k). Values are taken verbatim; colour-range rescaling is the caller's
/// decision.
CorrespondenceSet read_correspondences_csv(const std::string& path);
void write_correspondences_csv(const std::string& path, const CorrespondenceSet& pairs);

/// FNV-1a 64-bit hash of a file's bytes, as 16 hex digits (manifest content
/// hashes).
std::string fnv1a_file_hex(const std::string& path);

}  // namespace l2ot
