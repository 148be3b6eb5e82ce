#pragma once

// Overlapping block decomposition of the pixel grid.
//
// Blocks are block_size x block_size squares placed on a stride of
// block_size - overlap per axis; the last block of each axis is shifted
// flush against the image edge, so interior overlaps equal `overlap` and the
// final pair may overlap more.  Every block also carries its "owned"
// rectangle: the pixels whose nearest block centre (ties to the lower block
// index) is this block.  Owned rectangles tile the image exactly — that is
// the boolean partition of unity the restricted update relies on.

#include <cstdint>
#include <span>
#include <vector>

#include "schwarz_inpaint/image.hpp"

namespace schwarz_inpaint {

struct Subdomain {
  int x0 = 0, y0 = 0;          // inclusive block origin
  int width = 0, height = 0;   // block extent
  int own_x0 = 0, own_y0 = 0;  // owned rectangle, inclusive origin
  int own_x1 = 0, own_y1 = 0;  // owned rectangle, exclusive end

  std::size_t cell_count() const { return static_cast<std::size_t>(width) * height; }
};

struct SubdomainPartition {
  int image_width = 0;
  int image_height = 0;
  int block_size = 0;
  int overlap = 0;
  int blocks_x = 0;
  int blocks_y = 0;
  std::vector<Subdomain> subdomains;  // row-major: by * blocks_x + bx

  std::size_t size() const { return subdomains.size(); }
};

namespace detail {

// Anchor positions along one axis: multiples of the stride, with the last
// block pulled back to end exactly at `extent`.
inline std::vector<int> partition_axis(int extent, int block, int overlap) {
  const int stride = block - overlap;
  int count = 1;
  if (extent > block) {
    count = (extent - block + stride - 1) / stride + 1;
  }
  std::vector<int> anchors(count);
  for (int k = 0; k + 1 < count; ++k) anchors[k] = k * stride;
  anchors[count - 1] = extent - block;
  return anchors;
}

// Exclusive end of block k's owned interval: pixels up to the midpoint
// between the centres of blocks k and k+1, midpoint itself going to k.
inline int owned_end(const std::vector<int>& anchors, int k, int block, int extent) {
  if (k + 1 == static_cast<int>(anchors.size())) return extent;
  return (anchors[k] + anchors[k + 1] + block - 1) / 2 + 1;
}

}  // namespace detail

inline SubdomainPartition partition_domain(int width, int height, int block_size, int overlap) {
  detail::check_arg(width > 0 && height > 0, "partition_domain: image dimensions must be positive");
  detail::check_arg(block_size > 0, "partition_domain: block_size must be positive");
  detail::check_arg(overlap >= 0, "partition_domain: overlap must be non-negative");
  detail::check_arg(overlap < block_size, "partition_domain: overlap must be smaller than block_size");
  detail::check_arg(block_size <= width && block_size <= height,
                    "partition_domain: block_size exceeds image dimensions");

  const auto ax = detail::partition_axis(width, block_size, overlap);
  const auto ay = detail::partition_axis(height, block_size, overlap);

  SubdomainPartition part;
  part.image_width = width;
  part.image_height = height;
  part.block_size = block_size;
  part.overlap = overlap;
  part.blocks_x = static_cast<int>(ax.size());
  part.blocks_y = static_cast<int>(ay.size());
  part.subdomains.reserve(ax.size() * ay.size());

  std::vector<int> own_x_end(ax.size()), own_y_end(ay.size());
  for (int k = 0; k < part.blocks_x; ++k) own_x_end[k] = detail::owned_end(ax, k, block_size, width);
  for (int k = 0; k < part.blocks_y; ++k) own_y_end[k] = detail::owned_end(ay, k, block_size, height);

  for (int by = 0; by < part.blocks_y; ++by) {
    for (int bx = 0; bx < part.blocks_x; ++bx) {
      Subdomain sd;
      sd.x0 = ax[bx];
      sd.y0 = ay[by];
      sd.width = block_size;
      sd.height = block_size;
      sd.own_x0 = bx == 0 ? 0 : own_x_end[bx - 1];
      sd.own_y0 = by == 0 ? 0 : own_y_end[by - 1];
      sd.own_x1 = own_x_end[bx];
      sd.own_y1 = own_y_end[by];
      part.subdomains.push_back(sd);
    }
  }
  return part;
}

// Copies the block's pixels out of a full-grid vector (local row-major).
inline void restrict_block_into(const SubdomainPartition& part, std::size_t index,
                                std::span<const double> global, std::span<double> local) {
  const Subdomain& sd = part.subdomains[index];
  detail::check_arg(global.size() ==
                        static_cast<std::size_t>(part.image_width) * part.image_height,
                    "restrict_block: global vector length mismatch");
  detail::check_arg(local.size() == sd.cell_count(), "restrict_block: local vector length mismatch");
  for (int y = 0; y < sd.height; ++y) {
    const std::size_t src = static_cast<std::size_t>(sd.y0 + y) * part.image_width + sd.x0;
    const std::size_t dst = static_cast<std::size_t>(y) * sd.width;
    for (int x = 0; x < sd.width; ++x) local[dst + x] = global[src + x];
  }
}

inline ChannelVector restrict_block(const SubdomainPartition& part, std::size_t index,
                                    std::span<const double> global) {
  ChannelVector local(part.subdomains[index].cell_count());
  restrict_block_into(part, index, global, local);
  return local;
}

// R_i^T D_i v: embeds a local vector into the full grid, keeping only the
// pixels this block owns and zero everywhere else.
inline ChannelVector extend_weighted(const SubdomainPartition& part, std::size_t index,
                                     std::span<const double> local) {
  const Subdomain& sd = part.subdomains[index];
  detail::check_arg(local.size() == sd.cell_count(), "extend_weighted: local vector length mismatch");
  ChannelVector global(static_cast<std::size_t>(part.image_width) * part.image_height, 0.0);
  for (int y = sd.own_y0; y < sd.own_y1; ++y) {
    const std::size_t src = static_cast<std::size_t>(y - sd.y0) * sd.width + (sd.own_x0 - sd.x0);
    const std::size_t dst = static_cast<std::size_t>(y) * part.image_width + sd.own_x0;
    for (int x = 0; x < sd.own_x1 - sd.own_x0; ++x) global[dst + x] = local[src + x];
  }
  return global;
}

// In-place form of the weighted extension: adds the owned part of `local`
// into `global`.  Owned rectangles are disjoint, so concurrent calls for
// different blocks never write the same pixel.
inline void accumulate_owned(const SubdomainPartition& part, std::size_t index,
                             std::span<const double> local, std::span<double> global) {
  const Subdomain& sd = part.subdomains[index];
  for (int y = sd.own_y0; y < sd.own_y1; ++y) {
    const std::size_t src = static_cast<std::size_t>(y - sd.y0) * sd.width + (sd.own_x0 - sd.x0);
    const std::size_t dst = static_cast<std::size_t>(y) * part.image_width + sd.own_x0;
    for (int x = 0; x < sd.own_x1 - sd.own_x0; ++x) global[dst + x] += local[src + x];
  }
}

}  // namespace schwarz_inpaint
