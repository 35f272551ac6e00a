// Copyright 2026 The srstereo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "srstereo/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace srstereo::io {

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::string& header, const std::vector<unsigned char>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

// Netpbm-style header tokenizer: whitespace separated, '#' comments.
class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<unsigned char>& bytes) : b_(bytes) {}

  std::string token() {
    skip();
    std::string t;
    while (pos_ < b_.size() && !std::isspace(b_[pos_])) t.push_back(static_cast<char>(b_[pos_++]));
    if (t.empty()) throw FormatError("truncated header");
    return t;
  }
  int integer() {
    const std::string t = token();
    try {
      return std::stoi(t);
    } catch (const std::exception&) {
      throw FormatError("bad header integer '" + t + "'");
    }
  }
  // Exactly one whitespace byte separates the header from the raster.
  std::size_t body_offset() {
    if (pos_ >= b_.size()) throw FormatError("missing raster");
    return pos_ + 1;
  }

 private:
  void skip() {
    while (pos_ < b_.size()) {
      if (std::isspace(b_[pos_])) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& b_;
  std::size_t pos_ = 0;
};

unsigned char quantize(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const Image& rgb) {
  require(rgb.channels() == 3, "write_ppm: three channels required");
  const int H = rgb.height(), W = rgb.width();
  std::vector<unsigned char> body(static_cast<std::size_t>(H) * W * 3);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < 3; ++c) body[(static_cast<std::size_t>(y) * W + x) * 3 + c] = quantize(rgb.at(c, y, x));
  write_bytes(path, "P6\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n", body);
}

Image read_ppm(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  HeaderReader hr(bytes);
  if (hr.token() != "P6") throw FormatError(path.string() + ": not a P6 file");
  const int W = hr.integer(), H = hr.integer(), maxv = hr.integer();
  if (maxv != 255 || W <= 0 || H <= 0) throw FormatError(path.string() + ": unsupported PPM header");
  const std::size_t off = hr.body_offset();
  if (bytes.size() < off + static_cast<std::size_t>(W) * H * 3) throw FormatError(path.string() + ": short raster");
  Image img(3, H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) = bytes[off + (static_cast<std::size_t>(y) * W + x) * 3 + c] / 255.0;
  return img;
}

void write_pgm(const std::filesystem::path& path, const Mask& mask) {
  std::vector<unsigned char> body(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) body[i] = mask[i] ? 255 : 0;
  write_bytes(path, "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n", body);
}

Mask read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  HeaderReader hr(bytes);
  if (hr.token() != "P5") throw FormatError(path.string() + ": not a P5 file");
  const int W = hr.integer(), H = hr.integer(), maxv = hr.integer();
  if (maxv != 255 || W <= 0 || H <= 0) throw FormatError(path.string() + ": unsupported PGM header");
  const std::size_t off = hr.body_offset();
  if (bytes.size() < off + static_cast<std::size_t>(W) * H) throw FormatError(path.string() + ": short raster");
  Mask m(H, W);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, bytes[off + i] >= 128);
  return m;
}

void write_pfm(const std::filesystem::path& path, const Tensor& field) {
  require(field.channels() == 1, "write_pfm: single-channel field required");
  const int H = field.height(), W = field.width();
  std::vector<unsigned char> body(static_cast<std::size_t>(H) * W * 4);
  std::size_t k = 0;
  for (int y = H - 1; y >= 0; --y)
    for (int x = 0; x < W; ++x) {
      const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(field.at(0, y, x)));
      for (int b = 0; b < 4; ++b) body[k++] = static_cast<unsigned char>(u >> (8 * b));
    }
  write_bytes(path, "Pf\n" + std::to_string(W) + " " + std::to_string(H) + "\n-1.0\n", body);
}

Tensor read_pfm(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  HeaderReader hr(bytes);
  if (hr.token() != "Pf") throw FormatError(path.string() + ": not a grayscale PFM");
  const int W = hr.integer(), H = hr.integer();
  const std::string scale_tok = hr.token();
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": bad PFM scale");
  }
  if (scale >= 0.0) throw FormatError(path.string() + ": big-endian PFM not supported");
  if (W <= 0 || H <= 0) throw FormatError(path.string() + ": bad PFM size");
  const std::size_t off = hr.body_offset();
  if (bytes.size() < off + static_cast<std::size_t>(W) * H * 4) throw FormatError(path.string() + ": short raster");
  Tensor t(1, H, W);
  std::size_t k = off;
  for (int y = H - 1; y >= 0; --y)
    for (int x = 0; x < W; ++x) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bytes[k++]) << (8 * b);
      t.at(0, y, x) = std::bit_cast<float>(u);
    }
  return t;
}

namespace {
constexpr const char* kCheckpointMagic = "SRSTEREO-CHECKPOINT";
constexpr int kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store) {
  std::ostringstream hdr;
  hdr << kCheckpointMagic << ' ' << kCheckpointVersion << '\n' << "tensors " << store.size() << '\n';
  std::size_t offset = 0;
  for (const auto& e : store.entries()) {
    const Tensor& v = e.var.value();
    hdr << e.name << ' ' << v.channels() << ' ' << v.height() << ' ' << v.width() << ' ' << offset << '\n';
    offset += v.size() * 8;
  }
  hdr << "end\n";
  std::vector<unsigned char> body;
  body.reserve(offset);
  for (const auto& e : store.entries())
    for (double d : e.var.value().span()) {
      const auto u = std::bit_cast<std::uint64_t>(d);
      for (int b = 0; b < 8; ++b) body.push_back(static_cast<unsigned char>(u >> (8 * b)));
    }
  write_bytes(path, hdr.str(), body);
}

void load_checkpoint(const std::filesystem::path& path, ParameterStore& store) {
  const auto bytes = read_bytes(path);
  std::size_t pos = 0;
  auto line = [&]() {
    std::string s;
    while (pos < bytes.size() && bytes[pos] != '\n') s.push_back(static_cast<char>(bytes[pos++]));
    if (pos >= bytes.size()) throw FormatError(path.string() + ": truncated checkpoint header");
    ++pos;
    return s;
  };
  {
    std::istringstream first(line());
    std::string magic;
    int version = 0;
    first >> magic >> version;
    if (magic != kCheckpointMagic || version != kCheckpointVersion)
      throw FormatError(path.string() + ": not a version-1 checkpoint");
  }
  std::size_t count = 0;
  {
    std::istringstream ln(line());
    std::string key;
    ln >> key >> count;
    if (key != "tensors") throw FormatError(path.string() + ": missing tensor count");
  }
  if (count != store.size())
    throw FormatError(path.string() + ": checkpoint has " + std::to_string(count) + " tensors, model expects " +
                      std::to_string(store.size()));
  std::vector<std::size_t> offsets(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream ln(line());
    std::string name;
    int c = 0, h = 0, w = 0;
    ln >> name >> c >> h >> w >> offsets[i];
    const auto& e = store.entries()[i];
    const Tensor& v = e.var.value();
    if (name != e.name || c != v.channels() || h != v.height() || w != v.width())
      throw FormatError(path.string() + ": tensor " + std::to_string(i) + " (" + name + ") does not match " +
                        e.name + " " + v.shape_str());
  }
  if (line() != "end") throw FormatError(path.string() + ": missing header terminator");
  const std::size_t base = pos;
  for (std::size_t i = 0; i < count; ++i) {
    Tensor& v = store.entries()[i].var.mutable_value();
    std::size_t k = base + offsets[i];
    if (k + v.size() * 8 > bytes.size()) throw FormatError(path.string() + ": truncated payload");
    for (std::size_t j = 0; j < v.size(); ++j) {
      std::uint64_t u = 0;
      for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes[k++]) << (8 * b);
      v[j] = std::bit_cast<double>(u);
    }
  }
}

Image color_ramp(const Tensor& field, double lo, double hi) {
  require(field.channels() == 1 && hi > lo, "color_ramp: need a single channel and hi > lo");
  static constexpr double kStops[6][3] = {{0.0, 0.0, 0.5}, {0.0, 0.0, 1.0}, {0.0, 1.0, 1.0},
                                          {1.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, {0.5, 0.0, 0.0}};
  Image out(3, field.height(), field.width());
  for (int y = 0; y < field.height(); ++y)
    for (int x = 0; x < field.width(); ++x) {
      const double t = std::clamp((field.at(0, y, x) - lo) / (hi - lo), 0.0, 1.0) * 5.0;
      const int k = std::min(static_cast<int>(t), 4);
      const double f = t - k;
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = kStops[k][c] * (1.0 - f) + kStops[k + 1][c] * f;
    }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_bytes(path, text, {});
}

}  // namespace srstereo::io
