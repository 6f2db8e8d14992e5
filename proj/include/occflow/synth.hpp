#pragma once

#include "occflow/flowio.hpp"
#include "occflow/types.hpp"

namespace occflow {

// A generated triplet with exact ground truth. Occlusion masks are true where
// a pixel of the middle frame has no correspondence in that direction.
struct SynthScene {
  FrameTriplet frames;
  FlowFile gt_fwd;  // t -> t+1
  FlowFile gt_bwd;  // t -> t-1
  ValidityMask occ_fwd, occ_bwd;
};

// Smooth high-contrast noise texture, deterministic per seed.
Image synth_texture(int height, int width, uint64_t seed, int blur_passes = 2);

// Global translation of a textured image: forward flow (dx,dy) everywhere,
// backward flow its negation. Sub-pixel shifts are generated analytically.
SynthScene synth_translate(int height, int width, double dx, double dy, uint64_t seed);

struct OccluderParams {
  int height = 96;
  int width = 96;
  int block_h = 24;
  int block_w = 24;
  int speed_x = 3;  // block motion per frame, integer pixels
  int speed_y = 0;
  uint64_t seed = 0;
};

// Static textured background with an opaque textured block sliding across it.
// Forward occlusion is the background band covered between t and t+1.
SynthScene synth_occluder(const OccluderParams& p);

// Two textures split along the 45-degree line y = x, sliding parallel to the
// boundary in opposite directions (+-(shift,shift)); discontinuous flow with
// no occlusion. Distance to the motion edge is |x - y| / sqrt(2).
SynthScene synth_diag_shear(int height, int width, double shift, uint64_t seed);

}  // namespace occflow
