#pragma once

#include "occflow/types.hpp"

namespace occflow {

// Ordered coarse-to-fine stack; levels[0] is the finest (level 1).
struct Pyramid {
  std::vector<Image> levels;
  const Image& level(int idx1) const { return levels[static_cast<size_t>(idx1) - 1]; }
  int count() const { return static_cast<int>(levels.size()); }
};

// Separable 5-tap binomial low pass [1,4,6,4,1]/16, mirrored (reflect-101)
// borders, output clamped to [0,1].
Image binomial_blur(const Image& img);

// Halves both dims (ceil) after binomial_blur.
Image downsample2(const Image& img);

// levels >= 1; throws TooManyLevels if the coarsest level would drop below 4x4.
Pyramid build_pyramid(const Image& img, int levels);

// Bilinear resize of both components to (target_h, target_w), each scaled by
// the true spatial ratio so displacements stay in target-pixel units.
FlowField upsample_flow(const FlowField& f, int target_h, int target_w);

}  // namespace occflow
