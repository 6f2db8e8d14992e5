#include "occflow/pyramid.hpp"

#include <algorithm>

#include "occflow/parallel.hpp"

namespace occflow {

namespace {

// reflect-101: ...cba|abc|cba...
inline int mirror(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

constexpr double kBinomial[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

}  // namespace

Image binomial_blur(const Image& img) {
  const int h = img.height, w = img.width, cn = img.channels;
  Image tmp(h, w, cn), out(h, w, cn);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < cn; ++c) {
        double acc = 0;
        for (int k = -2; k <= 2; ++k) acc += kBinomial[k + 2] * img.at(y, mirror(x + k, w), c);
        tmp.at(y, x, c) = acc;
      }
  });
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < cn; ++c) {
        double acc = 0;
        for (int k = -2; k <= 2; ++k) acc += kBinomial[k + 2] * tmp.at(mirror(y + k, h), x, c);
        out.at(y, x, c) = std::clamp(acc, 0.0, 1.0);
      }
  });
  return out;
}

Image downsample2(const Image& img) {
  if (img.height < 4 || img.width < 4)
    fail(Err::ImageTooSmall, "downsample2: input must be at least 4x4, got " +
                                 std::to_string(img.height) + "x" + std::to_string(img.width));
  Image smooth = binomial_blur(img);
  const int oh = (img.height + 1) / 2, ow = (img.width + 1) / 2;
  Image out(oh, ow, img.channels);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = smooth.at(2 * y, 2 * x, c);
  return out;
}

Pyramid build_pyramid(const Image& img, int levels) {
  if (levels < 1) fail(Err::BadDims, "build_pyramid: levels must be >= 1");
  int h = img.height, w = img.width;
  for (int k = 1; k < levels; ++k) {
    h = (h + 1) / 2;
    w = (w + 1) / 2;
  }
  if (h < 4 || w < 4)
    fail(Err::TooManyLevels, "build_pyramid: coarsest level would be " + std::to_string(h) + "x" +
                                 std::to_string(w) + ", need at least 4x4");
  Pyramid pyr;
  pyr.levels.reserve(levels);
  pyr.levels.push_back(img);
  for (int k = 1; k < levels; ++k) pyr.levels.push_back(downsample2(pyr.levels.back()));
  return pyr;
}

FlowField upsample_flow(const FlowField& f, int target_h, int target_w) {
  if (target_h < f.height || target_w < f.width)
    fail(Err::BadDims, "upsample_flow: target smaller than source");
  const double sx = static_cast<double>(target_w) / f.width;
  const double sy = static_cast<double>(target_h) / f.height;
  FlowField out(target_h, target_w);
  parallel_rows(target_h, [&](int y) {
    double fy = std::clamp((y + 0.5) / sy - 0.5, 0.0, static_cast<double>(f.height - 1));
    int y0 = std::min(static_cast<int>(fy), f.height - 2 >= 0 ? f.height - 2 : 0);
    double wy = fy - y0;
    for (int x = 0; x < target_w; ++x) {
      double fx = std::clamp((x + 0.5) / sx - 0.5, 0.0, static_cast<double>(f.width - 1));
      int x0 = std::min(static_cast<int>(fx), f.width - 2 >= 0 ? f.width - 2 : 0);
      double wx = fx - x0;
      int x1 = std::min(x0 + 1, f.width - 1), y1 = std::min(y0 + 1, f.height - 1);
      double u = (1 - wy) * ((1 - wx) * f.u_at(y0, x0) + wx * f.u_at(y0, x1)) +
                 wy * ((1 - wx) * f.u_at(y1, x0) + wx * f.u_at(y1, x1));
      double v = (1 - wy) * ((1 - wx) * f.v_at(y0, x0) + wx * f.v_at(y0, x1)) +
                 wy * ((1 - wx) * f.v_at(y1, x0) + wx * f.v_at(y1, x1));
      out.u_at(y, x) = u * sx;
      out.v_at(y, x) = v * sy;
    }
  });
  return out;
}

}  // namespace occflow
