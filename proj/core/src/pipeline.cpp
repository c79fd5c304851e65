#include "l2ot/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace l2ot {

PointCloud image_to_cloud(const ImageBuffer& img, Eigen::Index max_samples, std::uint64_t seed) {
  if (img.width < 1 || img.height < 1) throw std::invalid_argument("image_to_cloud: empty image");
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(img.pixel_count()), 3);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) pts(static_cast<Eigen::Index>(p), c) = img.rgb[p * 3 + c];
  }
  return subsample(PointCloud(std::move(pts)), max_samples, seed);
}

ImageBuffer apply_colour_transform(const ImageBuffer& img, const TpsTransform& t) {
  if (t.dim != 3) throw std::invalid_argument("apply_colour_transform: transform must be 3-D");

  // Unique 8-bit colour keys, in sorted order so the memo layout is stable.
  std::vector<std::uint32_t> keys(img.pixel_count());
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    std::uint32_t key = 0;
    for (int c = 0; c < 3; ++c) {
      const auto byte = static_cast<std::uint32_t>(std::lround(img.rgb[p * 3 + c] * 255.0));
      key = (key << 8) | byte;
    }
    keys[p] = key;
  }
  std::vector<std::uint32_t> unique_keys = keys;
  std::sort(unique_keys.begin(), unique_keys.end());
  unique_keys.erase(std::unique(unique_keys.begin(), unique_keys.end()), unique_keys.end());

  std::unordered_map<std::uint32_t, std::size_t> slot;
  slot.reserve(unique_keys.size());
  for (std::size_t i = 0; i < unique_keys.size(); ++i) slot[unique_keys[i]] = i;

  std::vector<std::array<double, 3>> mapped(unique_keys.size());
#ifdef L2OT_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(unique_keys.size()); ++i) {
    const std::uint32_t key = unique_keys[static_cast<std::size_t>(i)];
    Eigen::Vector3d colour(((key >> 16) & 0xff) / 255.0, ((key >> 8) & 0xff) / 255.0,
                           (key & 0xff) / 255.0);
    const Eigen::Vector3d out = t.apply(colour);
    for (int c = 0; c < 3; ++c) {
      mapped[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
          std::clamp(out[c], 0.0, 1.0);
    }
  }

  ImageBuffer out = img;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    const auto& colour = mapped[slot[keys[p]]];
    for (int c = 0; c < 3; ++c) out.rgb[p * 3 + c] = colour[static_cast<std::size_t>(c)];
  }
  return out;
}

CorrespondenceSet normalize_colour_correspondences(const CorrespondenceSet& pairs) {
  if (pairs.size() == 0) return pairs;
  const double max_val = std::max(pairs.target.maxCoeff(), pairs.source.maxCoeff());
  if (max_val <= 1.0) return pairs;
  return CorrespondenceSet(pairs.target / 255.0, pairs.source / 255.0);
}

CostConfig resolve_cost_config(const CostConfig& cfg, bool have_correspondences,
                               const SolverConfig& solver_cfg) {
  CostConfig out = cfg;
  if (!have_correspondences) out.lambda = 0.0;
  if (solver_cfg.initial_h == 0.0) {
    out.include_t0 = false;
    out.include_t1 = false;
  }
  return out;
}

TransferResult transfer(const ImageBuffer& target_img, const ImageBuffer& palette_img,
                        const CorrespondenceSet* correspondences, const PipelineOptions& opts) {
  // Paired sampling: both clouds use the same seed, so identical images give
  // identical clouds and the self-transfer optimum is exactly the identity.
  const PointCloud source_cloud = image_to_cloud(target_img, opts.max_samples, opts.seed);
  const PointCloud target_cloud = image_to_cloud(palette_img, opts.max_samples, opts.seed);

  CorrespondenceSet scaled;
  const CorrespondenceSet* corr = nullptr;
  if (correspondences && correspondences->size() > 0) {
    if (correspondences->dim() != 3) {
      throw std::invalid_argument("transfer: colour correspondences must have 6 columns");
    }
    scaled = normalize_colour_correspondences(*correspondences);
    corr = &scaled;
  }

  TransferResult result;
  result.resolved_cost = resolve_cost_config(opts.cost, corr != nullptr, opts.solver);
  result.report =
      solve(target_cloud, source_cloud, corr, result.resolved_cost, opts.penalties, opts.solver);
  result.output = apply_colour_transform(target_img, result.report.transform);

  const double rb_sq = opts.report_bandwidth * opts.report_bandwidth;
  const KdeModel palette_kde{target_cloud, rb_sq};
  result.l2_before = l2_divergence(KdeModel{source_cloud, rb_sq}, palette_kde);
  const PointCloud recoloured_cloud = image_to_cloud(result.output, opts.max_samples, opts.seed);
  result.l2_after = l2_divergence(KdeModel{recoloured_cloud, rb_sq}, palette_kde);
  return result;
}

RegisterResult register_clouds(const PointCloud& target, const PointCloud& source,
                               const CorrespondenceSet* correspondences,
                               const PipelineOptions& opts) {
  if (target.dim() != source.dim()) {
    throw std::invalid_argument("register_clouds: cloud dimension mismatch");
  }
  const bool have_corr = correspondences && correspondences->size() > 0;
  if (have_corr && correspondences->dim() != target.dim()) {
    throw std::invalid_argument("register_clouds: correspondence dimension mismatch");
  }

  // One shared unit-box map across everything keeps relative geometry intact.
  Eigen::Index total = target.size() + source.size();
  if (have_corr) total += 2 * correspondences->size();
  Eigen::MatrixXd stacked(total, target.dim());
  Eigen::Index at = 0;
  stacked.middleRows(at, target.size()) = target.points;
  at += target.size();
  stacked.middleRows(at, source.size()) = source.points;
  at += source.size();
  if (have_corr) {
    stacked.middleRows(at, correspondences->size()) = correspondences->target;
    at += correspondences->size();
    stacked.middleRows(at, correspondences->size()) = correspondences->source;
  }
  const UnitBoxMap map = normalize_cloud(PointCloud(std::move(stacked))).second;

  PointCloud norm_target{map.normalize_rows(target.points)};
  PointCloud norm_source{map.normalize_rows(source.points)};
  norm_target = subsample(norm_target, opts.max_samples, opts.seed);
  norm_source = subsample(norm_source, opts.max_samples, opts.seed);

  CorrespondenceSet norm_corr;
  const CorrespondenceSet* corr = nullptr;
  if (have_corr) {
    norm_corr = CorrespondenceSet(map.normalize_rows(correspondences->target),
                                  map.normalize_rows(correspondences->source));
    corr = &norm_corr;
  }

  RegisterResult result;
  result.normalization = map;
  result.resolved_cost = resolve_cost_config(opts.cost, have_corr, opts.solver);
  result.report =
      solve(norm_target, norm_source, corr, result.resolved_cost, opts.penalties, opts.solver);
  result.transform = result.report.transform;
  if (have_corr) result.rmse = evaluate_fit(result.transform, norm_corr);
  return result;
}

}  // namespace l2ot
