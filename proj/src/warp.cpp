#include "occflow/warp.hpp"

#include <algorithm>

#include "occflow/gradient.hpp"
#include "occflow/parallel.hpp"

namespace occflow {

namespace {

// Shared sampling kernel. tap_mask, when given, invalidates pixels whose 2x2
// sampling cell touches a masked-out source pixel.
WarpResult sample_grid(const Image& src, const FlowField& flow, const ValidityMask* tap_mask) {
  const int h = src.height, w = src.width, cn = src.channels;
  WarpResult out;
  out.warped = Image(h, w, cn);
  out.jac_u = Image(h, w, cn);
  out.jac_v = Image(h, w, cn);
  out.valid = ValidityMask(h, w, true);

  parallel_rows(h, [&](int py) {
    for (int px = 0; px < w; ++px) {
      double x = px + flow.u_at(py, px);
      double y = py + flow.v_at(py, px);
      bool inside = x >= 0.0 && x <= w - 1 && y >= 0.0 && y <= h - 1;
      double xc = std::clamp(x, 0.0, static_cast<double>(w - 1));
      double yc = std::clamp(y, 0.0, static_cast<double>(h - 1));
      // Cell of floor(coord), shifted so x0+1/y0+1 stay on the grid.
      int x0 = std::min(static_cast<int>(xc), w - 2);
      int y0 = std::min(static_cast<int>(yc), h - 2);
      double fx = xc - x0;
      double fy = yc - y0;
      if (tap_mask && inside)
        inside = tap_mask->at(y0, x0) && tap_mask->at(y0, x0 + 1) && tap_mask->at(y0 + 1, x0) &&
                 tap_mask->at(y0 + 1, x0 + 1);
      out.valid.set(py, px, inside);
      for (int c = 0; c < cn; ++c) {
        double v00 = src.at(y0, x0, c), v10 = src.at(y0, x0 + 1, c);
        double v01 = src.at(y0 + 1, x0, c), v11 = src.at(y0 + 1, x0 + 1, c);
        out.warped.at(py, px, c) =
            (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
        out.jac_u.at(py, px, c) = (1 - fy) * (v10 - v00) + fy * (v11 - v01);
        out.jac_v.at(py, px, c) = (1 - fx) * (v01 - v00) + fx * (v11 - v10);
      }
    }
  });
  return out;
}

}  // namespace

WarpResult bilinear_sample(const Image& src, const FlowField& flow) {
  if (src.height != flow.height || src.width != flow.width)
    fail(Err::DimMismatch, "bilinear_sample: source and flow dims differ");
  if (src.height < 2 || src.width < 2) fail(Err::DimMismatch, "bilinear_sample: grid must be at least 2x2");
  return sample_grid(src, flow, nullptr);
}

std::vector<WarpResult> warp_gradient_images(const Image& src, const FlowField& flow,
                                             const std::vector<Direction>& directions) {
  if (src.height != flow.height || src.width != flow.width)
    fail(Err::DimMismatch, "warp_gradient_images: source and flow dims differ");
  if (src.height < 2 || src.width < 2)
    fail(Err::DimMismatch, "warp_gradient_images: grid must be at least 2x2");
  std::vector<WarpResult> out;
  out.reserve(directions.size());
  for (Direction d : directions) {
    GradientResult g = directional_gradient(src, d);
    out.push_back(sample_grid(g.grad, flow, &g.valid));
  }
  return out;
}

}  // namespace occflow
