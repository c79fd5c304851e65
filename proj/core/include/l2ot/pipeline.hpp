#pragma once

#include <cstdint>
#include <optional>

#include "l2ot/image.hpp"
#include "l2ot/solver.hpp"

namespace l2ot {

/// End-to-end run options shared by the colour-transfer and registration
/// pipelines.
struct PipelineOptions {
  CostConfig cost;
  PenaltyParams penalties;
  SolverConfig solver;
  Eigen::Index max_samples = 3000;  // pairwise terms are O(n * n~); cap the clouds
  std::uint64_t seed = 0;
  double report_bandwidth = 0.05;   // bandwidth of the reported L2 divergence
};

/// Every pixel becomes a 3-D colour point; clouds above max_samples are
/// subsampled deterministically per seed.
PointCloud image_to_cloud(const ImageBuffer& img, Eigen::Index max_samples, std::uint64_t seed);

/// Apply the colour map to every pixel through a memo over the image's unique
/// quantised colours (exactness preserved; images have far fewer distinct
/// colours than pixels). Outputs are clamped to [0, 1]; alpha is untouched.
ImageBuffer apply_colour_transform(const ImageBuffer& img, const TpsTransform& t);

/// Scale 0-255 colour correspondences into the unit cube when needed
/// (auto-detected by any value exceeding 1).
CorrespondenceSet normalize_colour_correspondences(const CorrespondenceSet& pairs);

/// Resolve run-dependent config: lambda falls back to 0 without
/// correspondences, and the marginal self-terms are switched off when the
/// annealing schedule is Dirac (they are undefined at zero bandwidth).
CostConfig resolve_cost_config(const CostConfig& cfg, bool have_correspondences,
                               const SolverConfig& solver_cfg);

struct TransferResult {
  ImageBuffer output;
  SolveReport report;
  double l2_before = 0.0;  // divergence between the image cloud and the palette cloud
  double l2_after = 0.0;   // same, for the recoloured image
  CostConfig resolved_cost;
};

/// Colour transfer: the transform moves the target image's colours (the
/// source side of the cost) onto the palette image's colours (the target
/// side), then recolours the full-resolution target image.
TransferResult transfer(const ImageBuffer& target_img, const ImageBuffer& palette_img,
                        const CorrespondenceSet* correspondences, const PipelineOptions& opts);

struct RegisterResult {
  TpsTransform transform;     // acts in the jointly normalised coordinates
  UnitBoxMap normalization;   // shared map for target, source and pairs
  SolveReport report;
  std::optional<double> rmse; // over the correspondences, normalised units
  CostConfig resolved_cost;
};

/// Point-set registration. Both clouds (and any correspondences) are
/// normalised with one shared unit-box map so their relative geometry is
/// preserved; the returned transform lives in that space.
RegisterResult register_clouds(const PointCloud& target, const PointCloud& source,
                               const CorrespondenceSet* correspondences,
                               const PipelineOptions& opts);

}  // namespace l2ot
