#include "dofvo/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <png.h>

namespace dofvo {

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height), pixels_(static_cast<std::size_t>(width) * height, fill) {}

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 0 || height < 0 || pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw usage_error("GrayImage: pixel count does not match dimensions");
  }
}

double GrayImage::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return (*this)(x, y);
}

double GrayImage::bilinear(double x, double y) const {
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const int x0 = std::min(static_cast<int>(x), width_ - 2 < 0 ? 0 : width_ - 2);
  const int y0 = std::min(static_cast<int>(y), height_ - 2 < 0 ? 0 : height_ - 2);
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double ax = x - x0, ay = y - y0;
  const double top = (1 - ax) * (*this)(x0, y0) + ax * (*this)(x1, y0);
  const double bottom = (1 - ax) * (*this)(x0, y1) + ax * (*this)(x1, y1);
  return (1 - ay) * top + ay * bottom;
}

namespace {

void check_dimensions(int w, int h, const ImageLoadOptions& opts, const std::filesystem::path& path) {
  if (w < opts.min_dimension || h < opts.min_dimension) {
    throw data_error("image " + path.string() + " is " + std::to_string(w) + "x" + std::to_string(h) +
                     ", below the minimum dimension " + std::to_string(opts.min_dimension));
  }
}

GrayImage load_png(const std::filesystem::path& path, const ImageLoadOptions& opts) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw data_error("cannot decode PNG " + path.string() + ": " + image.message);
  }
  const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr) == 0) {
    png_image_free(&image);
    throw data_error("cannot decode PNG " + path.string() + ": " + image.message);
  }
  check_dimensions(w, h, opts, path);
  std::vector<double> px(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (colour) {
      const double v = 0.299 * buffer[3 * i] + 0.587 * buffer[3 * i + 1] + 0.114 * buffer[3 * i + 2];
      px[i] = v / 255.0;
    } else {
      px[i] = buffer[i] / 255.0;
    }
  }
  return {w, h, std::move(px)};
}

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

GrayImage load_pgm(const std::filesystem::path& path, const ImageLoadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open image " + path.string());
  const std::string magic = pgm_token(in);
  if (magic != "P5" && magic != "P2") throw data_error("unsupported PNM variant in " + path.string());
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pgm_token(in));
    h = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw data_error("malformed PGM header in " + path.string());
  }
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw data_error("unsupported PGM (only 8-bit, maxval 255) in " + path.string());
  }
  check_dimensions(w, h, opts, path);
  std::vector<double> px(static_cast<std::size_t>(w) * h);
  if (magic == "P5") {
    std::vector<unsigned char> raw(px.size());
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw data_error("truncated PGM data in " + path.string());
    }
    std::transform(raw.begin(), raw.end(), px.begin(), [](unsigned char v) { return v / 255.0; });
  } else {
    for (auto& v : px) {
      int value = 0;
      if (!(in >> value) || value < 0 || value > 255) throw data_error("malformed PGM data in " + path.string());
      v = value / 255.0;
    }
  }
  return {w, h, std::move(px)};
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path, const ImageLoadOptions& opts) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw data_error("cannot open image " + path.string());
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), sizeof sig);
  probe.close();
  if (png_sig_cmp(sig, 0, 8) == 0) return load_png(path, opts);
  if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2')) return load_pgm(path, opts);
  throw data_error("unsupported image format: " + path.string());
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(img.pixels().size());
  std::transform(img.pixels().begin(), img.pixels().end(), buffer.begin(), [](double v) {
    return static_cast<png_byte>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  if (png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr) == 0) {
    throw data_error("cannot write PNG " + path.string() + ": " + image.message);
  }
}

}  // namespace dofvo
