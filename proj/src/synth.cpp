#include "occflow/synth.hpp"

#include <algorithm>
#include <cmath>

#include "occflow/pyramid.hpp"
#include "occflow/rng.hpp"

namespace occflow {

namespace {

// Bilinear canvas lookup; callers keep samples in bounds by construction.
double sample_canvas(const Image& canvas, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(canvas.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(canvas.height - 1));
  int x0 = std::min(static_cast<int>(x), canvas.width - 2);
  int y0 = std::min(static_cast<int>(y), canvas.height - 2);
  double fx = x - x0, fy = y - y0;
  return (1 - fy) * ((1 - fx) * canvas.at(y0, x0) + fx * canvas.at(y0, x0 + 1)) +
         fy * ((1 - fx) * canvas.at(y0 + 1, x0) + fx * canvas.at(y0 + 1, x0 + 1));
}

Image noise_image(Rng& rng, int h, int w) {
  Image img(h, w, 1);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

void stretch_contrast(Image& img, double lo, double hi) {
  double mn = img.data[0], mx = img.data[0];
  for (double v : img.data) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  double span = mx - mn;
  if (span < 1e-12) span = 1.0;
  for (double& v : img.data) v = lo + (hi - lo) * (v - mn) / span;
}

FlowFile constant_flow(int h, int w, double u, double v) {
  FlowFile f;
  f.flow = FlowField(h, w, u, v);
  f.valid = ValidityMask(h, w, true);
  return f;
}

}  // namespace

Image synth_texture(int height, int width, uint64_t seed, int blur_passes) {
  Rng rng(seed);
  Image smooth = noise_image(rng, height, width);
  for (int i = 0; i < blur_passes; ++i) smooth = binomial_blur(smooth);
  Image fine = noise_image(rng, height, width);
  for (size_t i = 0; i < smooth.data.size(); ++i)
    smooth.data[i] = 0.8 * smooth.data[i] + 0.2 * fine.data[i];
  stretch_contrast(smooth, 0.05, 0.95);
  return smooth;
}

SynthScene synth_translate(int height, int width, double dx, double dy, uint64_t seed) {
  const int margin = static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))) + 2;
  Image canvas = synth_texture(height + 2 * margin, width + 2 * margin, seed);

  SynthScene sc;
  sc.frames.prev = Image(height, width, 1);
  sc.frames.curr = Image(height, width, 1);
  sc.frames.next = Image(height, width, 1);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double cx = x + margin, cy = y + margin;
      sc.frames.curr.at(y, x) = sample_canvas(canvas, cx, cy);
      sc.frames.next.at(y, x) = sample_canvas(canvas, cx - dx, cy - dy);
      sc.frames.prev.at(y, x) = sample_canvas(canvas, cx + dx, cy + dy);
    }
  sc.gt_fwd = constant_flow(height, width, dx, dy);
  sc.gt_bwd = constant_flow(height, width, -dx, -dy);
  sc.occ_fwd = ValidityMask(height, width, false);
  sc.occ_bwd = ValidityMask(height, width, false);
  return sc;
}

SynthScene synth_occluder(const OccluderParams& p) {
  Image background = synth_texture(p.height, p.width, p.seed);
  // Separate texture stream so the block does not camouflage.
  Image block_tex = synth_texture(p.block_h, p.block_w, p.seed ^ 0xb10cULL);
  for (double& v : block_tex.data) v = std::clamp(v * 0.5 + 0.5, 0.0, 1.0);  // brighter block

  // Block placed so it stays inside the frame at t-1, t, t+1.
  const int travel_x = std::abs(p.speed_x), travel_y = std::abs(p.speed_y);
  int bx0 = (p.width - p.block_w) / 2 - p.speed_x;  // origin at t-1
  int by0 = (p.height - p.block_h) / 2 - p.speed_y;
  if (bx0 < travel_x || by0 < travel_y || bx0 + p.block_w + 3 * travel_x > p.width ||
      by0 + p.block_h + 3 * travel_y > p.height)
    fail(Err::BadDims, "synth_occluder: block does not fit the frame over the triplet");

  auto in_block = [&](int x, int y, int tau) {
    int ox = bx0 + (tau + 1) * p.speed_x;
    int oy = by0 + (tau + 1) * p.speed_y;
    return x >= ox && x < ox + p.block_w && y >= oy && y < oy + p.block_h;
  };
  auto render = [&](int tau) {
    Image img = background;
    int ox = bx0 + (tau + 1) * p.speed_x;
    int oy = by0 + (tau + 1) * p.speed_y;
    for (int y = 0; y < p.block_h; ++y)
      for (int x = 0; x < p.block_w; ++x) img.at(oy + y, ox + x) = block_tex.at(y, x);
    return img;
  };

  SynthScene sc;
  sc.frames.prev = render(-1);
  sc.frames.curr = render(0);
  sc.frames.next = render(+1);
  sc.gt_fwd = constant_flow(p.height, p.width, 0, 0);
  sc.gt_bwd = constant_flow(p.height, p.width, 0, 0);
  sc.occ_fwd = ValidityMask(p.height, p.width, false);
  sc.occ_bwd = ValidityMask(p.height, p.width, false);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      bool now = in_block(x, y, 0);
      if (now) {
        sc.gt_fwd.flow.u_at(y, x) = p.speed_x;
        sc.gt_fwd.flow.v_at(y, x) = p.speed_y;
        sc.gt_bwd.flow.u_at(y, x) = -p.speed_x;
        sc.gt_bwd.flow.v_at(y, x) = -p.speed_y;
      } else {
        // Background pixel: occluded in a direction when the block covers it there.
        sc.occ_fwd.set(y, x, in_block(x, y, +1));
        sc.occ_bwd.set(y, x, in_block(x, y, -1));
      }
    }
  return sc;
}

SynthScene synth_diag_shear(int height, int width, double shift, uint64_t seed) {
  const int margin = static_cast<int>(std::ceil(std::abs(shift))) + 2;
  Image tex_a = synth_texture(height + 2 * margin, width + 2 * margin, seed);
  Image tex_b = synth_texture(height + 2 * margin, width + 2 * margin, seed ^ 0xd1a6ULL);
  // Distinct brightness bands keep a visible edge along the boundary.
  for (double& v : tex_a.data) v = 0.55 + 0.4 * v;
  for (double& v : tex_b.data) v = 0.05 + 0.4 * v;

  SynthScene sc;
  sc.frames.prev = Image(height, width, 1);
  sc.frames.curr = Image(height, width, 1);
  sc.frames.next = Image(height, width, 1);
  sc.gt_fwd = constant_flow(height, width, 0, 0);
  sc.gt_bwd = constant_flow(height, width, 0, 0);
  sc.occ_fwd = ValidityMask(height, width, false);
  sc.occ_bwd = ValidityMask(height, width, false);

  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      bool region_a = x - y > 0;
      const Image& tex = region_a ? tex_a : tex_b;
      double s = region_a ? shift : -shift;
      double cx = x + margin, cy = y + margin;
      sc.frames.curr.at(y, x) = sample_canvas(tex, cx, cy);
      sc.frames.next.at(y, x) = sample_canvas(tex, cx - s, cy - s);
      sc.frames.prev.at(y, x) = sample_canvas(tex, cx + s, cy + s);
      sc.gt_fwd.flow.u_at(y, x) = s;
      sc.gt_fwd.flow.v_at(y, x) = s;
      sc.gt_bwd.flow.u_at(y, x) = -s;
      sc.gt_bwd.flow.v_at(y, x) = -s;
    }
  return sc;
}

}  // namespace occflow
