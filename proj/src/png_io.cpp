#include "camdepth/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

namespace camdepth {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void png_error_to_exception(png_structp, png_const_charp msg) {
  throw std::runtime_error(std::string("libpng: ") + msg);
}

void png_warning_ignore(png_structp, png_const_charp) {}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;

  PngReader() {
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_exception,
                                 png_warning_ignore);
    if (!png) throw std::runtime_error("libpng: cannot create read struct");
    info = png_create_info_struct(png);
    if (!info) {
      png_destroy_read_struct(&png, nullptr, nullptr);
      throw std::runtime_error("libpng: cannot create info struct");
    }
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;

  PngWriter() {
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_exception,
                                  png_warning_ignore);
    if (!png) throw std::runtime_error("libpng: cannot create write struct");
    info = png_create_info_struct(png);
    if (!info) {
      png_destroy_write_struct(&png, nullptr);
      throw std::runtime_error("libpng: cannot create info struct");
    }
  }
  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

bool host_is_little_endian() {
  const std::uint16_t probe = 1;
  return *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
}

}  // namespace

GrayImage16 load_gray16(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open PNG for reading: " + path);

  PngReader r;
  png_init_io(r.png, fp.get());
  png_read_info(r.png, r.info);

  const int bit_depth = png_get_bit_depth(r.png, r.info);
  const int color_type = png_get_color_type(r.png, r.info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY)
    throw std::runtime_error(path + ": expected 16-bit single-channel PNG, got bit depth " +
                             std::to_string(bit_depth) + ", color type " +
                             std::to_string(color_type));

  GrayImage16 img;
  img.width = static_cast<int>(png_get_image_width(r.png, r.info));
  img.height = static_cast<int>(png_get_image_height(r.png, r.info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);

  if (host_is_little_endian()) png_set_swap(r.png);
  png_read_update_info(r.png, r.info);

  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(y) * img.width);
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return img;
}

void save_gray16(const GrayImage16& img, const std::string& path) {
  if (img.width < 1 || img.height < 1) throw std::invalid_argument("save_gray16: empty image");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open PNG for writing: " + path);

  PngWriter w;
  png_init_io(w.png, fp.get());
  png_set_IHDR(w.png, w.info, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  if (host_is_little_endian()) png_set_swap(w.png);

  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(
        const_cast<std::uint16_t*>(img.pixels.data() + static_cast<std::size_t>(y) * img.width));
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

DepthMap load_depth(const std::string& path, double depth_scale) {
  if (!(depth_scale > 0.0)) throw std::invalid_argument("load_depth: depth_scale must be > 0");
  const GrayImage16 img = load_gray16(path);
  DepthMap d(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    if (img.pixels[i] != 0) {
      d.values[i] = static_cast<double>(img.pixels[i]) / depth_scale;
      d.valid[i] = 1;
    }
  }
  return d;
}

void save_depth(const DepthMap& map, const std::string& path, double depth_scale) {
  if (!(depth_scale > 0.0)) throw std::invalid_argument("save_depth: depth_scale must be > 0");
  GrayImage16 img;
  img.width = map.width;
  img.height = map.height;
  img.pixels.resize(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!map.valid[i]) continue;
    const double u = std::floor(map.values[i] * depth_scale + 0.5);  // round-half-up
    if (u > 65535.0)
      throw std::runtime_error("save_depth: value " + std::to_string(map.values[i]) +
                               " m overflows 16-bit range at scale " + std::to_string(depth_scale));
    img.pixels[i] = static_cast<std::uint16_t>(u);
  }
  save_gray16(img, path);
}

ImageRGB load_rgb(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open PNG for reading: " + path);

  PngReader r;
  png_init_io(r.png, fp.get());
  png_read_info(r.png, r.info);

  const int bit_depth = png_get_bit_depth(r.png, r.info);
  const int color_type = png_get_color_type(r.png, r.info);
  if (bit_depth == 16) png_set_strip_16(r.png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(r.png);
  if (bit_depth < 8) png_set_expand(r.png);
  if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
  png_set_strip_alpha(r.png);
  png_read_update_info(r.png, r.info);

  ImageRGB img;
  img.width = static_cast<int>(png_get_image_width(r.png, r.info));
  img.height = static_cast<int>(png_get_image_height(r.png, r.info));
  img.data.resize(static_cast<std::size_t>(img.width) * img.height * 3);

  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = img.data.data() + static_cast<std::size_t>(y) * img.width * 3;
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return img;
}

void save_rgb(const ImageRGB& img, const std::string& path) {
  if (img.width < 1 || img.height < 1) throw std::invalid_argument("save_rgb: empty image");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open PNG for writing: " + path);

  PngWriter w;
  png_init_io(w.png, fp.get());
  png_set_IHDR(w.png, w.info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);

  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(img.data.data() + static_cast<std::size_t>(y) * img.width * 3);
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

}  // namespace camdepth
