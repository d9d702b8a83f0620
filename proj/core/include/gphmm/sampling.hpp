#pragma once

#include <cstddef>
#include <vector>

namespace gphmm {

struct BlockOrigin {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  bool operator==(const BlockOrigin&) const = default;
};

/// Strip and block geometry over one image.
///
/// Strips of height `strip_h` run top to bottom with vertical step
/// `strip_h - overlap_p`. Inside a strip, block rows step by `block_k - overlap_p`
/// and blocks step by the same amount horizontally. Partial blocks at the right
/// and bottom margins are dropped. `blocks` is row-major over the block grid.
struct SamplingPlan {
  std::size_t image_w = 0;
  std::size_t image_h = 0;
  std::size_t block_k = 0;
  std::size_t overlap_p = 0;
  std::size_t strip_h = 0;
  std::size_t n_strips = 0;
  std::size_t rows_per_strip = 0;
  std::size_t blocks_per_row = 0;
  std::vector<BlockOrigin> blocks;

  std::size_t T() const { return blocks.size(); }
  std::size_t n_block_rows() const { return n_strips * rows_per_strip; }
  std::size_t step() const { return block_k - overlap_p; }
  /// Width covered by full blocks: overlap_p + blocks_per_row * step().
  std::size_t covered_width() const { return overlap_p + blocks_per_row * step(); }
};

SamplingPlan plan_sampling(std::size_t image_w, std::size_t image_h, std::size_t block_k,
                           std::size_t overlap_p, std::size_t strip_h);

enum class ScanMode {
  Serpentine,  // row 0 left to right, row 1 right to left, alternating
  Zigzag,      // every row left to right (raster order)
};

/// Block indices (into plan.blocks) in the order they are linearized.
std::vector<std::size_t> scan_order(const SamplingPlan& plan, ScanMode mode = ScanMode::Serpentine);

}  // namespace gphmm
