#include "occflow/gradient.hpp"

#include "occflow/parallel.hpp"

namespace occflow {

ValidityMask gradient_valid_mask(int height, int width, Direction d) {
  ValidityMask mask(height, width, true);
  for (int y = 0; y < height; ++y) {
    int sy = y - d.dy;
    bool row_ok = sy >= 0 && sy < height;
    for (int x = 0; x < width; ++x) {
      int sx = x - d.dx;
      if (!row_ok || sx < 0 || sx >= width) mask.set(y, x, false);
    }
  }
  return mask;
}

GradientResult directional_gradient(const Image& field, Direction d) {
  GradientResult out;
  out.grad = Image(field.height, field.width, field.channels, 0.0);
  out.valid = gradient_valid_mask(field.height, field.width, d);
  const int c_n = field.channels;
  parallel_rows(field.height, [&](int y) {
    int sy = y - d.dy;
    if (sy < 0 || sy >= field.height) return;
    for (int x = 0; x < field.width; ++x) {
      int sx = x - d.dx;
      if (sx < 0 || sx >= field.width) continue;
      for (int c = 0; c < c_n; ++c) out.grad.at(y, x, c) = field.at(y, x, c) - field.at(sy, sx, c);
    }
  });
  return out;
}

ScalarGradientResult directional_gradient(const ScalarField& field, Direction d) {
  ScalarGradientResult out;
  out.grad = ScalarField(field.height, field.width, 0.0);
  out.valid = gradient_valid_mask(field.height, field.width, d);
  for (int y = 0; y < field.height; ++y) {
    int sy = y - d.dy;
    if (sy < 0 || sy >= field.height) continue;
    for (int x = 0; x < field.width; ++x) {
      int sx = x - d.dx;
      if (sx < 0 || sx >= field.width) continue;
      out.grad.at(y, x) = field.at(y, x) - field.at(sy, sx);
    }
  }
  return out;
}

}  // namespace occflow
