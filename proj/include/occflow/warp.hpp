#pragma once

#include "occflow/types.hpp"

namespace occflow {

// Backward-warp sample of a source grid at p + flow(p). `warped` holds the
// bilinear value per channel, `jac_u`/`jac_v` the exact derivative of that
// value w.r.t. the flow components, `valid` is false wherever the unclamped
// sample coordinate leaves [0,W-1]x[0,H-1].
struct WarpResult {
  Image warped;
  Image jac_u;
  Image jac_v;
  ValidityMask valid;
};

WarpResult bilinear_sample(const Image& src, const FlowField& flow);

// For each direction: difference the source along d first, then sample the
// gradient image at p + flow(p). Validity requires in-bounds sampling, all
// four taps gradient-valid, and is ANDed by callers with the target-side mask.
std::vector<WarpResult> warp_gradient_images(const Image& src, const FlowField& flow,
                                             const std::vector<Direction>& directions);

}  // namespace occflow
