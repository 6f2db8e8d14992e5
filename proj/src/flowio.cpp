#include "occflow/flowio.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace occflow {

namespace {

constexpr double kFloMagic = 202021.25;
constexpr double kUnknownSentinel = 1e9;
constexpr double kUnknownWrite = 1e10;

uint32_t load_le32(const unsigned char* b) {
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void store_le32(uint32_t v, unsigned char* b) {
  b[0] = v & 0xff;
  b[1] = (v >> 8) & 0xff;
  b[2] = (v >> 16) & 0xff;
  b[3] = (v >> 24) & 0xff;
}

float bits_to_float(uint32_t v) {
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

uint32_t float_to_bits(float f) {
  uint32_t v;
  std::memcpy(&v, &f, 4);
  return v;
}

std::vector<unsigned char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::IoFailure, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Err::IoFailure, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Err::IoFailure, "short write to " + path);
}

std::string lower_ext(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

// ---------------------------------------------------------------------------
// Middlebury .flo
// ---------------------------------------------------------------------------

FlowFile read_flo(const std::string& path) {
  std::vector<unsigned char> bytes = read_all(path);
  if (bytes.size() < 12) fail(Err::TruncatedFile, path + ": shorter than a .flo header");
  float magic = bits_to_float(load_le32(bytes.data()));
  if (magic != static_cast<float>(kFloMagic)) fail(Err::BadMagic, path + ": bad .flo magic");
  int32_t w = static_cast<int32_t>(load_le32(bytes.data() + 4));
  int32_t h = static_cast<int32_t>(load_le32(bytes.data() + 8));
  if (w <= 0 || h <= 0 || w > 32767 || h > 32767)
    fail(Err::DimOverflow, path + ": implausible dims " + std::to_string(w) + "x" + std::to_string(h));
  size_t need = 12 + static_cast<size_t>(w) * h * 8;
  if (bytes.size() < need) fail(Err::TruncatedFile, path + ": payload shorter than header dims");

  FlowFile out;
  out.flow = FlowField(h, w);
  out.valid = ValidityMask(h, w, true);
  const unsigned char* p = bytes.data() + 12;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float u = bits_to_float(load_le32(p));
      float v = bits_to_float(load_le32(p + 4));
      p += 8;
      bool known = std::isfinite(u) && std::isfinite(v) && std::abs(u) < kUnknownSentinel &&
                   std::abs(v) < kUnknownSentinel;
      out.valid.set(y, x, known);
      out.flow.u_at(y, x) = known ? u : 0.0;
      out.flow.v_at(y, x) = known ? v : 0.0;
    }
  return out;
}

void write_flo(const FlowFile& f, const std::string& path) {
  const int h = f.flow.height, w = f.flow.width;
  if (w > 32767 || h > 32767) fail(Err::DimOverflow, "write_flo: dims exceed 32767");
  std::vector<unsigned char> bytes(12 + static_cast<size_t>(w) * h * 8);
  store_le32(float_to_bits(static_cast<float>(kFloMagic)), bytes.data());
  store_le32(static_cast<uint32_t>(w), bytes.data() + 4);
  store_le32(static_cast<uint32_t>(h), bytes.data() + 8);
  unsigned char* p = bytes.data() + 12;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float u, v;
      if (f.valid.at(y, x)) {
        u = static_cast<float>(f.flow.u_at(y, x));
        v = static_cast<float>(f.flow.v_at(y, x));
      } else {
        u = v = static_cast<float>(kUnknownWrite);
      }
      store_le32(float_to_bits(u), p);
      store_le32(float_to_bits(v), p + 4);
      p += 8;
    }
  write_all(path, bytes);
}

void write_flo(const FlowField& flow, const std::string& path) {
  write_flo(FlowFile{flow, ValidityMask(flow.height, flow.width, true)}, path);
}

// ---------------------------------------------------------------------------
// png plumbing
// ---------------------------------------------------------------------------

namespace {

struct PngRaw {
  int width = 0, height = 0, channels = 0, bit_depth = 0;
  std::vector<uint16_t> data;  // interleaved, one entry per sample
};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

PngRaw read_png_raw(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail(Err::IoFailure, "cannot open " + path);
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
    fail(Err::UnsupportedFormat, path + ": not a png file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Err::UnsupportedFormat, path + ": png decode error");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  PngRaw raw;
  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && raw.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  raw.bit_depth = png_get_bit_depth(png, info);
  raw.channels = png_get_channels(png, info);
  size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> rowbuf(rowbytes);
  raw.data.resize(static_cast<size_t>(raw.width) * raw.height * raw.channels);

  for (int y = 0; y < raw.height; ++y) {
    png_read_row(png, rowbuf.data(), nullptr);
    uint16_t* dst = raw.data.data() + static_cast<size_t>(y) * raw.width * raw.channels;
    if (raw.bit_depth == 16) {
      for (size_t i = 0; i < static_cast<size_t>(raw.width) * raw.channels; ++i)
        dst[i] = static_cast<uint16_t>(rowbuf[2 * i] << 8 | rowbuf[2 * i + 1]);  // png is big-endian
    } else {
      for (size_t i = 0; i < static_cast<size_t>(raw.width) * raw.channels; ++i) dst[i] = rowbuf[i];
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raw;
}

void write_png_raw(const std::string& path, const PngRaw& raw) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(Err::IoFailure, "cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(Err::IoFailure, path + ": png encode error");
  }
  png_init_io(png, fp.get());
  int color_type = raw.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, raw.width, raw.height, raw.bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  size_t samples_per_row = static_cast<size_t>(raw.width) * raw.channels;
  std::vector<unsigned char> rowbuf(samples_per_row * (raw.bit_depth == 16 ? 2 : 1));
  for (int y = 0; y < raw.height; ++y) {
    const uint16_t* src = raw.data.data() + static_cast<size_t>(y) * samples_per_row;
    if (raw.bit_depth == 16) {
      for (size_t i = 0; i < samples_per_row; ++i) {
        rowbuf[2 * i] = static_cast<unsigned char>(src[i] >> 8);
        rowbuf[2 * i + 1] = static_cast<unsigned char>(src[i] & 0xff);
      }
    } else {
      for (size_t i = 0; i < samples_per_row; ++i) rowbuf[i] = static_cast<unsigned char>(src[i]);
    }
    png_write_row(png, rowbuf.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

// ---------------------------------------------------------------------------
// KITTI 16-bit flow png
// ---------------------------------------------------------------------------

FlowFile read_kitti_flow(const std::string& path) {
  PngRaw raw = read_png_raw(path);
  if (raw.bit_depth != 16) fail(Err::NotSixteenBit, path + ": KITTI flow must be 16-bit");
  if (raw.channels != 3) fail(Err::BadChannelCount, path + ": KITTI flow must have 3 channels");
  FlowFile out;
  out.flow = FlowField(raw.height, raw.width);
  out.valid = ValidityMask(raw.height, raw.width, true);
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x) {
      const uint16_t* px = raw.data.data() + (static_cast<size_t>(y) * raw.width + x) * 3;
      out.flow.u_at(y, x) = (static_cast<double>(px[0]) - 32768.0) / 64.0;
      out.flow.v_at(y, x) = (static_cast<double>(px[1]) - 32768.0) / 64.0;
      out.valid.set(y, x, px[2] > 0);
    }
  return out;
}

void write_kitti_flow(const FlowFile& f, const std::string& path) {
  PngRaw raw;
  raw.width = f.flow.width;
  raw.height = f.flow.height;
  raw.channels = 3;
  raw.bit_depth = 16;
  raw.data.resize(static_cast<size_t>(raw.width) * raw.height * 3);
  const double limit = 511.984375;  // (65535 - 32768) / 64
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x) {
      uint16_t* px = raw.data.data() + (static_cast<size_t>(y) * raw.width + x) * 3;
      double u = std::clamp(f.flow.u_at(y, x), -limit, limit);
      double v = std::clamp(f.flow.v_at(y, x), -limit, limit);
      px[0] = static_cast<uint16_t>(std::lround(u * 64.0 + 32768.0));
      px[1] = static_cast<uint16_t>(std::lround(v * 64.0 + 32768.0));
      px[2] = f.valid.at(y, x) ? 1 : 0;
    }
  write_png_raw(path, raw);
}

// ---------------------------------------------------------------------------
// color wheel
// ---------------------------------------------------------------------------

namespace {

// 55-entry wheel: 15 RY, 6 YG, 4 GC, 11 CB, 13 BM, 6 MR.
std::vector<std::array<double, 3>> make_color_wheel() {
  const int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
  std::vector<std::array<double, 3>> wheel;
  wheel.reserve(RY + YG + GC + CB + BM + MR);
  for (int i = 0; i < RY; ++i) wheel.push_back({255.0, 255.0 * i / RY, 0.0});
  for (int i = 0; i < YG; ++i) wheel.push_back({255.0 - 255.0 * i / YG, 255.0, 0.0});
  for (int i = 0; i < GC; ++i) wheel.push_back({0.0, 255.0, 255.0 * i / GC});
  for (int i = 0; i < CB; ++i) wheel.push_back({0.0, 255.0 - 255.0 * i / CB, 255.0});
  for (int i = 0; i < BM; ++i) wheel.push_back({255.0 * i / BM, 0.0, 255.0});
  for (int i = 0; i < MR; ++i) wheel.push_back({255.0, 0.0, 255.0 - 255.0 * i / MR});
  return wheel;
}

}  // namespace

Image flow_to_color(const FlowField& flow, double max_radius) {
  static const std::vector<std::array<double, 3>> wheel = make_color_wheel();
  const int ncols = static_cast<int>(wheel.size());
  const int h = flow.height, w = flow.width;

  double maxrad = max_radius;
  if (maxrad <= 0) {
    for (size_t i = 0; i < flow.u.size(); ++i)
      maxrad = std::max(maxrad, std::hypot(flow.u[i], flow.v[i]));
  }
  if (maxrad < 1e-12) maxrad = 1.0;

  Image out(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double u = flow.u_at(y, x), v = flow.v_at(y, x);
      double rad = std::min(std::hypot(u, v) / maxrad, 1.0);
      double a = std::atan2(-v, -u) / M_PI;  // [-1, 1]
      double fk = (a + 1.0) / 2.0 * (ncols - 1);
      int k0 = static_cast<int>(fk);
      if (k0 >= ncols) k0 = ncols - 1;
      int k1 = (k0 + 1) % ncols;
      double f = fk - k0;
      for (int c = 0; c < 3; ++c) {
        double col = ((1 - f) * wheel[k0][c] + f * wheel[k1][c]) / 255.0;
        out.at(y, x, c) = 1.0 - rad * (1.0 - col);
      }
    }
  return out;
}

// ---------------------------------------------------------------------------
// 8-bit images
// ---------------------------------------------------------------------------

namespace {

Image from_bytes8(int h, int w, int cn, const std::vector<uint16_t>& data) {
  Image img(h, w, cn);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = data[i] / 255.0;
  return img;
}

int skip_pnm_header_token(const std::vector<unsigned char>& b, size_t& pos, int& value) {
  // whitespace and # comments between tokens
  while (pos < b.size()) {
    if (std::isspace(b[pos])) {
      ++pos;
    } else if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  if (pos >= b.size() || !std::isdigit(b[pos])) return -1;
  value = 0;
  while (pos < b.size() && std::isdigit(b[pos])) value = value * 10 + (b[pos++] - '0');
  return 0;
}

Image read_pnm(const std::string& path) {
  std::vector<unsigned char> bytes = read_all(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    fail(Err::UnsupportedFormat, path + ": expected binary P5/P6 pnm");
  int cn = bytes[1] == '5' ? 1 : 3;
  size_t pos = 2;
  int w = 0, h = 0, maxval = 0;
  if (skip_pnm_header_token(bytes, pos, w) || skip_pnm_header_token(bytes, pos, h) ||
      skip_pnm_header_token(bytes, pos, maxval))
    fail(Err::TruncatedFile, path + ": malformed pnm header");
  if (maxval != 255) fail(Err::UnsupportedFormat, path + ": only maxval 255 supported");
  ++pos;  // single whitespace after maxval
  size_t need = static_cast<size_t>(w) * h * cn;
  if (bytes.size() < pos + need) fail(Err::TruncatedFile, path + ": pnm payload truncated");
  Image img(h, w, cn);
  for (size_t i = 0; i < need; ++i) img.data[i] = bytes[pos + i] / 255.0;
  return img;
}

void write_pnm(const Image& img, const std::string& path) {
  std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" +
                       std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + img.data.size());
  for (double v : img.data)
    bytes.push_back(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  write_all(path, bytes);
}

}  // namespace

Image read_image(const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "pgm" || ext == "ppm") return read_pnm(path);
  if (ext == "png") {
    PngRaw raw = read_png_raw(path);
    if (raw.bit_depth != 8) fail(Err::UnsupportedFormat, path + ": expected an 8-bit image");
    if (raw.channels != 1 && raw.channels != 3)
      fail(Err::UnsupportedFormat, path + ": expected grayscale or rgb");
    return from_bytes8(raw.height, raw.width, raw.channels, raw.data);
  }
  fail(Err::UnsupportedFormat, path + ": unknown image extension ." + ext);
}

void write_image(const Image& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3)
    fail(Err::UnsupportedFormat, "write_image: 1 or 3 channels required");
  std::string ext = lower_ext(path);
  if (ext == "pgm") {
    if (img.channels != 1) fail(Err::UnsupportedFormat, ".pgm requires a single channel");
    write_pnm(img, path);
    return;
  }
  if (ext == "ppm") {
    if (img.channels != 3) fail(Err::UnsupportedFormat, ".ppm requires three channels");
    write_pnm(img, path);
    return;
  }
  if (ext == "png") {
    PngRaw raw;
    raw.width = img.width;
    raw.height = img.height;
    raw.channels = img.channels;
    raw.bit_depth = 8;
    raw.data.resize(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i)
      raw.data[i] = static_cast<uint16_t>(std::lround(std::clamp(img.data[i], 0.0, 1.0) * 255.0));
    write_png_raw(path, raw);
    return;
  }
  fail(Err::UnsupportedFormat, path + ": unknown image extension ." + ext);
}

}  // namespace occflow
