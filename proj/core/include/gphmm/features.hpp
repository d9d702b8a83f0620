#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gphmm/gabor_bank.hpp"
#include "gphmm/sampling.hpp"

namespace gphmm {

/// One informative-feature scalar per block, in scan order.
struct ObservationSequence {
  std::vector<double> values;
  std::string source_id;

  std::size_t size() const { return values.size(); }
  bool operator==(const ObservationSequence&) const = default;
};

/// Arithmetic mean of all pixels, clamped to [min, max] so rounding cannot
/// push it outside the data range.
double global_mean(const FeatureImage& gf);

/// Sum of the block's pixels that are >= `g_bar`; when none qualify the block
/// contributes `fallback_scale * g_bar`.
double block_feature(const FeatureImage& gf, BlockOrigin origin, std::size_t block_k, double g_bar,
                     double fallback_scale);

/// Same as above with the fallback scale equal to the block side.
inline double block_feature(const FeatureImage& gf, BlockOrigin origin, std::size_t block_k,
                            double g_bar) {
  return block_feature(gf, origin, block_k, g_bar, static_cast<double>(block_k));
}

struct ExtractOptions {
  /// Multiplier of the global mean used when a block has no pixel above it.
  /// Zero means "use the block side".
  double fallback_scale = 0.0;
};

ObservationSequence extract_observations(const FeatureImage& gf, const SamplingPlan& plan,
                                         std::span<const std::size_t> order,
                                         std::string source_id = {},
                                         const ExtractOptions& options = {});

}  // namespace gphmm
