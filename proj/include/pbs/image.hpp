#pragma once

#include <filesystem>
#include <vector>

#include "pbs/geometry.hpp"

namespace pbs {

/// Linear RGB image with float channels in [0, 1], row-major from the top.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // 3 floats per pixel

  RgbImage() = default;
  RgbImage(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  float* at(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const float* at(int x, int y) const { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  void set(int x, int y, float r, float g, float b) {
    float* p = at(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
  bool operator==(const RgbImage&) const = default;
};

void write_ppm(const RgbImage& image, const std::filesystem::path& path);
void write_png(const RgbImage& image, const std::filesystem::path& path);
/// PNG for ".png", binary PPM otherwise.
void write_image(const RgbImage& image, const std::filesystem::path& path);

/// Maps a scalar field onto a grayscale image, scaling [lo, hi] to [0, 1].
RgbImage grayscale_image(const std::vector<double>& values, int width, int height, double lo, double hi);

}  // namespace pbs
