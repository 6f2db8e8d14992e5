#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace occflow {

enum class Err {
  DimMismatch,
  ImageTooSmall,
  TooManyLevels,
  BadDims,
  AllPixelsInvalid,
  NonFiniteLoss,
  NonFiniteGradient,
  BadMagic,
  TruncatedFile,
  DimOverflow,
  NotSixteenBit,
  BadChannelCount,
  UnsupportedFormat,
  NocNotSubset,
  RegionEmpty,
  IoFailure,
  BadConfig,
};

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw Error(code, what); }

// Multi-channel scalar grid, row-major, channel interleaved. Values of real
// images live in [0,1]; derived grids (gradient images) may leave that range.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c), data(static_cast<size_t>(h) * w * c, fill) {}

  double& at(int y, int x, int c = 0) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  double at(int y, int x, int c = 0) const { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  size_t size() const { return data.size(); }
  bool same_dims(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

struct ScalarField {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  ScalarField() = default;
  ScalarField(int h, int w, double fill = 0.0) : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return data.size(); }
};

// Per-pixel displacement in pixels: u along x (rightward column index),
// v along y (downward row index).
struct FlowField {
  int height = 0;
  int width = 0;
  std::vector<double> u;
  std::vector<double> v;

  FlowField() = default;
  FlowField(int h, int w, double fu = 0.0, double fv = 0.0)
      : height(h), width(w), u(static_cast<size_t>(h) * w, fu), v(static_cast<size_t>(h) * w, fv) {}

  double& u_at(int y, int x) { return u[static_cast<size_t>(y) * width + x]; }
  double u_at(int y, int x) const { return u[static_cast<size_t>(y) * width + x]; }
  double& v_at(int y, int x) { return v[static_cast<size_t>(y) * width + x]; }
  double v_at(int y, int x) const { return v[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return u.size(); }
};

struct ValidityMask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;

  ValidityMask() = default;
  ValidityMask(int h, int w, bool fill = true)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill ? 1 : 0) {}

  bool at(int y, int x) const { return data[static_cast<size_t>(y) * width + x] != 0; }
  void set(int y, int x, bool v) { data[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
  size_t count() const {
    size_t n = 0;
    for (uint8_t b : data) n += b;
    return n;
  }
};

// Unit grid offset for directional differences; (dx,dy) components in {-1,0,1}.
struct Direction {
  int dx = 1;
  int dy = 0;
  bool operator==(const Direction& o) const { return dx == o.dx && dy == o.dy; }
};

// 0, 45, 90, 135 degrees: every distinct difference axis on the 8-neighbourhood.
inline std::vector<Direction> directions_default() {
  return {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
}

// Literal printed set, 0/45/90/180 degrees; 180 duplicates 0 up to sign.
inline std::vector<Direction> directions_paper() {
  return {{1, 0}, {1, 1}, {0, 1}, {-1, 0}};
}

// Axis-only set used by the multi-direction ablation.
inline std::vector<Direction> directions_axis() {
  return {{1, 0}, {0, 1}};
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

struct FrameTriplet {
  Image prev;
  Image curr;
  Image next;
};

}  // namespace occflow
