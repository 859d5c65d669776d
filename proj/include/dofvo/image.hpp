#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dofvo/error.hpp"

namespace dofvo {

/// Row-major grayscale image with intensities in [0, 1].
class GrayImage {
 public:
  static constexpr int kMinDimension = 32;

  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  double operator()(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  double& operator()(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Border-replicated access.
  double clamped(int x, int y) const;
  /// Bilinear sample; coordinates outside the image are clamped to the border.
  double bilinear(double x, double y) const;

  const std::vector<double>& pixels() const { return pixels_; }
  std::vector<double>& pixels() { return pixels_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

struct ImageLoadOptions {
  int min_dimension = GrayImage::kMinDimension;
};

/// Loads an 8-bit PNG (gray, gray+alpha, RGB, RGBA) or binary/ASCII PGM.
/// Colour is reduced with luminance weights (0.299, 0.587, 0.114).
GrayImage load_image(const std::filesystem::path& path, const ImageLoadOptions& opts = {});

/// Writes an 8-bit grayscale PNG, rounding intensities to value*255.
void save_png(const GrayImage& img, const std::filesystem::path& path);

}  // namespace dofvo
