#include "gphmm/features.hpp"

#include <algorithm>
#include <string>

#include "gphmm/error.hpp"

namespace gphmm {

double global_mean(const FeatureImage& gf) {
  const auto px = gf.pixels.values();
  if (px.empty()) throw InvalidArgument("global_mean: empty feature image");
  double sum = 0.0;
  for (double v : px) sum += v;
  const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
  return std::clamp(sum / static_cast<double>(px.size()), *lo, *hi);
}

double block_feature(const FeatureImage& gf, BlockOrigin origin, std::size_t block_k, double g_bar,
                     double fallback_scale) {
  if (block_k == 0 || origin.x0 + block_k > gf.width() || origin.y0 + block_k > gf.height()) {
    throw InvalidArgument("block_feature: block at (" + std::to_string(origin.x0) + ", " +
                          std::to_string(origin.y0) + ") of side " + std::to_string(block_k) +
                          " exceeds the " + std::to_string(gf.width()) + "x" +
                          std::to_string(gf.height()) + " image");
  }
  double sum = 0.0;
  bool any = false;
  for (std::size_t y = origin.y0; y < origin.y0 + block_k; ++y) {
    const auto row = gf.pixels.row(y);
    for (std::size_t x = origin.x0; x < origin.x0 + block_k; ++x) {
      if (row[x] >= g_bar) {
        sum += row[x];
        any = true;
      }
    }
  }
  return any ? sum : fallback_scale * g_bar;
}

ObservationSequence extract_observations(const FeatureImage& gf, const SamplingPlan& plan,
                                         std::span<const std::size_t> order,
                                         std::string source_id, const ExtractOptions& options) {
  if (gf.width() != plan.image_w || gf.height() != plan.image_h) {
    throw InvalidArgument("extract_observations: feature image is " + std::to_string(gf.width()) +
                          "x" + std::to_string(gf.height()) + " but the plan expects " +
                          std::to_string(plan.image_w) + "x" + std::to_string(plan.image_h));
  }
  if (order.size() != plan.T()) {
    throw InvalidArgument("extract_observations: scan order length differs from plan.T");
  }
  const double g_bar = global_mean(gf);
  const double fallback =
      options.fallback_scale > 0.0 ? options.fallback_scale : static_cast<double>(plan.block_k);

  ObservationSequence seq;
  seq.source_id = std::move(source_id);
  seq.values.resize(order.size());
  for (std::size_t t = 0; t < order.size(); ++t) {
    if (order[t] >= plan.T()) throw InvalidArgument("extract_observations: block index out of range");
    seq.values[t] = block_feature(gf, plan.blocks[order[t]], plan.block_k, g_bar, fallback);
  }
  return seq;
}

}  // namespace gphmm
