#include "gphmm/sampling.hpp"

#include <string>

#include "gphmm/error.hpp"

namespace gphmm {

SamplingPlan plan_sampling(std::size_t image_w, std::size_t image_h, std::size_t block_k,
                           std::size_t overlap_p, std::size_t strip_h) {
  if (block_k == 0) throw InvalidArgument("plan_sampling: block_k must be positive");
  if (overlap_p >= block_k) {
    throw InvalidArgument("plan_sampling: overlap_p (" + std::to_string(overlap_p) +
                          ") must be smaller than block_k (" + std::to_string(block_k) + ")");
  }
  if (strip_h < block_k) {
    throw InvalidArgument("plan_sampling: strip_h (" + std::to_string(strip_h) +
                          ") must be at least block_k (" + std::to_string(block_k) + ")");
  }
  if (image_w < block_k || image_h < strip_h) {
    throw InvalidArgument("plan_sampling: image " + std::to_string(image_w) + "x" +
                          std::to_string(image_h) + " is smaller than one " +
                          std::to_string(block_k) + "x" + std::to_string(strip_h) + " strip");
  }

  SamplingPlan plan;
  plan.image_w = image_w;
  plan.image_h = image_h;
  plan.block_k = block_k;
  plan.overlap_p = overlap_p;
  plan.strip_h = strip_h;

  const std::size_t step = block_k - overlap_p;
  const std::size_t strip_step = strip_h - overlap_p;
  plan.n_strips = (image_h - overlap_p) / strip_step;
  plan.rows_per_strip = (strip_h - overlap_p) / step;
  plan.blocks_per_row = (image_w - overlap_p) / step;

  plan.blocks.reserve(plan.n_strips * plan.rows_per_strip * plan.blocks_per_row);
  for (std::size_t s = 0; s < plan.n_strips; ++s) {
    for (std::size_t r = 0; r < plan.rows_per_strip; ++r) {
      const std::size_t y0 = s * strip_step + r * step;
      for (std::size_t c = 0; c < plan.blocks_per_row; ++c) {
        plan.blocks.push_back({c * step, y0});
      }
    }
  }
  return plan;
}

std::vector<std::size_t> scan_order(const SamplingPlan& plan, ScanMode mode) {
  const std::size_t cols = plan.blocks_per_row;
  const std::size_t rows = plan.n_block_rows();
  if (rows * cols != plan.blocks.size()) {
    throw InvalidArgument("scan_order: plan block list does not match its grid shape");
  }
  std::vector<std::size_t> order;
  order.reserve(plan.blocks.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const bool reversed = mode == ScanMode::Serpentine && r % 2 == 1;
    for (std::size_t i = 0; i < cols; ++i) {
      const std::size_t c = reversed ? cols - 1 - i : i;
      order.push_back(r * cols + c);
    }
  }
  return order;
}

}  // namespace gphmm
