#pragma once

#include <string>
#include <vector>

#include "raylearn/vec3.hpp"

namespace raylearn {

// Accumulation buffer: per-pixel radiance sum plus sample count, resolved to
// the mean on read.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  int pixel_count() const { return width_ * height_; }

  void add(int x, int y, const Rgb& value, double weight = 1.0);
  void set(int x, int y, const Rgb& value);  // replaces with weight 1

  Rgb value(int x, int y) const;
  Rgb value(int pixel) const;
  double sample_count(int x, int y) const;

  bool all_finite() const;

 private:
  int width_ = 0, height_ = 0;
  std::vector<Rgb> sum_;
  std::vector<double> count_;
};

// sqrt(mean((a-b)^2 / (relative ? b^2 + 1e-4 : 1))) over pixels and channels.
double rmse(const ImageBuffer& a, const ImageBuffer& b, bool relative);

// Fixed palette visualization of per-pixel integer labels.
ImageBuffer false_color_light_index(const std::vector<int>& indices, int width, int height);
Rgb palette_color(int index);

// Per-channel gain * (a-b)^2, clamped to [0,1].
ImageBuffer difference_image(const ImageBuffer& a, const ImageBuffer& b, double gain);

enum class ImageFormat { kPpm, kPfm };

// PPM: binary P6, 8-bit, sRGB transfer function. PFM: 32-bit little-endian
// floats, bottom-up rows, scale -1.
void write_image(const ImageBuffer& image, const std::string& path, ImageFormat format);

// Reads a PFM written by write_image (or any little-endian color PFM).
ImageBuffer read_pfm(const std::string& path);

double srgb_encode(double linear);

ImageFormat format_for_path(const std::string& path);  // by extension

}  // namespace raylearn
