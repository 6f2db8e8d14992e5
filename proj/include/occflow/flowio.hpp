#pragma once

#include <string>

#include "occflow/types.hpp"

namespace occflow {

// Flow plus per-pixel validity. Formats without a validity channel read as
// all-true except pixels carrying the Middlebury unknown sentinel (>= 1e9).
struct FlowFile {
  FlowField flow;
  ValidityMask valid;
};

FlowFile read_flo(const std::string& path);
void write_flo(const FlowField& flow, const std::string& path);
void write_flo(const FlowFile& f, const std::string& path);

// KITTI 2015 convention: 16-bit RGB png, u = (ch1 - 2^15)/64, v = (ch2 - 2^15)/64,
// valid = ch3 > 0. Writing rounds to nearest and clamps to +-511.984375.
FlowFile read_kitti_flow(const std::string& path);
void write_kitti_flow(const FlowFile& f, const std::string& path);

// 55-bin Middlebury color wheel. max_radius <= 0 means the field's maximum
// magnitude; saturation is magnitude / max_radius clipped to 1.
Image flow_to_color(const FlowField& flow, double max_radius = 0.0);

// 8-bit grayscale or RGB images, values scaled to [0,1]. Dispatches on the
// extension: .pgm, .ppm, .png.
Image read_image(const std::string& path);
void write_image(const Image& img, const std::string& path);

}  // namespace occflow
