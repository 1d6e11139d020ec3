#include "raylearn/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "raylearn/common.hpp"

namespace raylearn {

ImageBuffer::ImageBuffer(int width, int height) : width_(width), height_(height) {
  require(width > 0 && height > 0, "image: dimensions must be positive");
  sum_.assign(size_t(width) * height, Rgb{0, 0, 0});
  count_.assign(size_t(width) * height, 0.0);
}

void ImageBuffer::add(int x, int y, const Rgb& value, double weight) {
  require(x >= 0 && x < width_ && y >= 0 && y < height_, "image: pixel out of range");
  sum_[size_t(y) * width_ + x] += value * weight;
  count_[size_t(y) * width_ + x] += weight;
}

void ImageBuffer::set(int x, int y, const Rgb& value) {
  require(x >= 0 && x < width_ && y >= 0 && y < height_, "image: pixel out of range");
  sum_[size_t(y) * width_ + x] = value;
  count_[size_t(y) * width_ + x] = 1.0;
}

Rgb ImageBuffer::value(int x, int y) const {
  require(x >= 0 && x < width_ && y >= 0 && y < height_, "image: pixel out of range");
  return value(y * width_ + x);
}

Rgb ImageBuffer::value(int pixel) const {
  double c = count_[pixel];
  return c > 0 ? sum_[pixel] / c : Rgb{0, 0, 0};
}

double ImageBuffer::sample_count(int x, int y) const {
  return count_[size_t(y) * width_ + x];
}

bool ImageBuffer::all_finite() const {
  for (const Rgb& v : sum_)
    if (!is_finite(v)) return false;
  return true;
}

double rmse(const ImageBuffer& a, const ImageBuffer& b, bool relative) {
  require(a.width() == b.width() && a.height() == b.height(), "rmse: dimension mismatch");
  double total = 0;
  const int n = a.pixel_count();
  for (int i = 0; i < n; ++i) {
    Rgb va = a.value(i), vb = b.value(i);
    for (int c = 0; c < 3; ++c) {
      double d = va[c] - vb[c];
      total += relative ? d * d / (vb[c] * vb[c] + 1e-4) : d * d;
    }
  }
  return std::sqrt(total / (3.0 * n));
}

Rgb palette_color(int index) {
  static const Rgb palette[16] = {
      {0.90, 0.10, 0.10}, {0.10, 0.60, 0.95}, {0.15, 0.80, 0.15}, {0.95, 0.80, 0.10},
      {0.70, 0.15, 0.85}, {0.95, 0.50, 0.10}, {0.10, 0.85, 0.80}, {0.90, 0.25, 0.60},
      {0.35, 0.35, 0.95}, {0.55, 0.75, 0.10}, {0.60, 0.40, 0.20}, {0.15, 0.45, 0.25},
      {0.85, 0.70, 0.55}, {0.45, 0.10, 0.30}, {0.25, 0.25, 0.25}, {0.80, 0.90, 0.95}};
  require(index >= 0, "palette: negative index");
  return palette[index % 16];
}

ImageBuffer false_color_light_index(const std::vector<int>& indices, int width, int height) {
  require(int(indices.size()) == width * height, "false color: index count mismatch");
  ImageBuffer out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.set(x, y, palette_color(indices[size_t(y) * width + x]));
  return out;
}

ImageBuffer difference_image(const ImageBuffer& a, const ImageBuffer& b, double gain) {
  require(a.width() == b.width() && a.height() == b.height(),
          "difference_image: dimension mismatch");
  ImageBuffer out(a.width(), a.height());
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      Rgb d = a.value(x, y) - b.value(x, y);
      Rgb v{gain * d.x * d.x, gain * d.y * d.y, gain * d.z * d.z};
      out.set(x, y, {std::clamp(v.x, 0.0, 1.0), std::clamp(v.y, 0.0, 1.0),
                     std::clamp(v.z, 0.0, 1.0)});
    }
  return out;
}

double srgb_encode(double linear) {
  linear = std::clamp(linear, 0.0, 1.0);
  if (linear <= 0.0031308) return 12.92 * linear;
  return 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

ImageFormat format_for_path(const std::string& path) {
  size_t dotpos = path.find_last_of('.');
  std::string ext = dotpos == std::string::npos ? "" : path.substr(dotpos);
  if (ext == ".pfm") return ImageFormat::kPfm;
  if (ext == ".ppm") return ImageFormat::kPpm;
  throw IoError("unknown image extension (want .ppm or .pfm): " + path);
}

void write_image(const ImageBuffer& image, const std::string& path, ImageFormat format) {
  require(image.width() > 0 && image.height() > 0, "write_image: empty buffer");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);

  if (format == ImageFormat::kPpm) {
    os << "P6\n" << image.width() << " " << image.height() << "\n255\n";
    for (int y = 0; y < image.height(); ++y)
      for (int x = 0; x < image.width(); ++x) {
        Rgb v = image.value(x, y);
        for (int c = 0; c < 3; ++c) {
          int byte = int(std::lround(srgb_encode(v[c]) * 255.0));
          os.put(char(std::clamp(byte, 0, 255)));
        }
      }
  } else {
    os << "PF\n" << image.width() << " " << image.height() << "\n-1.000000\n";
    // PFM stores rows bottom-up.
    for (int y = image.height() - 1; y >= 0; --y)
      for (int x = 0; x < image.width(); ++x) {
        Rgb v = image.value(x, y);
        for (int c = 0; c < 3; ++c) {
          float f = float(v[c]);
          os.write(reinterpret_cast<const char*>(&f), sizeof(float));
        }
      }
  }
  if (!os) throw IoError("write failed: " + path);
}

ImageBuffer read_pfm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  std::string magic;
  is >> magic;
  if (magic != "PF") throw IoError("not a color PFM file: " + path);
  int w = 0, h = 0;
  double scale = 0;
  is >> w >> h >> scale;
  if (!is || w <= 0 || h <= 0 || scale >= 0)
    throw IoError("unsupported PFM header (need little-endian): " + path);
  is.get();  // single whitespace after the scale line

  ImageBuffer out(w, h);
  std::vector<float> row(size_t(w) * 3);
  for (int y = h - 1; y >= 0; --y) {
    is.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size() * sizeof(float)));
    if (!is) throw IoError("PFM file truncated: " + path);
    for (int x = 0; x < w; ++x)
      out.set(x, y, Rgb{row[size_t(x) * 3], row[size_t(x) * 3 + 1], row[size_t(x) * 3 + 2]});
  }
  return out;
}

}  // namespace raylearn
