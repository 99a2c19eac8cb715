// PNG file I/O backed by libpng. Grayscale 16-bit for label and depth
// images, 8-bit for RGB/RGBA renders and binary masks.
#pragma once

#include <png.h>

#include <cstdio>
#include <csetjmp>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "beeer/core.hpp"

namespace beeer {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PngError : public IoError {
 public:
  using IoError::IoError;
};

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;
  bool operator==(const Rgba&) const = default;
};

using RgbaImage = Grid<Rgba>;

namespace detail {

struct PngReadHandle {
  std::FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngReadHandle() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteHandle {
  std::FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngWriteHandle() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

inline void open_read(PngReadHandle& h, const std::string& path) {
  h.fp = std::fopen(path.c_str(), "rb");
  if (!h.fp) throw IoError("cannot open " + path + " for reading");
  h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (h.png) h.info = png_create_info_struct(h.png);
  if (!h.png || !h.info) throw PngError("libpng init failed for " + path);
}

inline void open_write(PngWriteHandle& h, const std::string& path) {
  h.fp = std::fopen(path.c_str(), "wb");
  if (!h.fp) throw IoError("cannot open " + path + " for writing");
  h.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (h.png) h.info = png_create_info_struct(h.png);
  if (!h.png || !h.info) throw PngError("libpng init failed for " + path);
}

inline ImageSize checked_size(png_structp png, png_infop info, const std::string& path) {
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  if (w < 1 || h < 1 || w > (1u << 24) || h > (1u << 24)) {
    throw PngError("unreasonable dimensions in " + path);
  }
  return ImageSize{static_cast<int>(w), static_cast<int>(h)};
}

}  // namespace detail

/// Read a grayscale PNG as 16-bit values. 8-bit files load with their raw
/// sample values (no rescale), so small integer labels survive either depth.
inline Grid<std::uint16_t> read_png_gray16(const std::string& path) {
  detail::PngReadHandle h;
  detail::open_read(h, path);

  ImageSize size;
  std::vector<std::uint16_t> pixels;
  std::vector<std::uint8_t> row8;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(h.png))) throw PngError("failed to decode " + path);

  png_init_io(h.png, h.fp);
  png_read_info(h.png, h.info);
  size = detail::checked_size(h.png, h.info, path);

  const int color = png_get_color_type(h.png, h.info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    throw PngError(path + ": expected a grayscale image");
  }
  if (png_get_bit_depth(h.png, h.info) < 8) png_set_expand_gray_1_2_4_to_8(h.png);
  png_read_update_info(h.png, h.info);

  const int depth = png_get_bit_depth(h.png, h.info);
  pixels.assign(size.pixel_count(), 0);
  rows.resize(size.height);
  if (depth == 16) {
    png_set_swap(h.png);
    for (int y = 0; y < size.height; ++y) {
      rows[y] = reinterpret_cast<png_bytep>(pixels.data() +
                                            static_cast<std::size_t>(y) * size.width);
    }
    png_read_image(h.png, rows.data());
  } else {
    row8.assign(size.pixel_count(), 0);
    for (int y = 0; y < size.height; ++y) {
      rows[y] = row8.data() + static_cast<std::size_t>(y) * size.width;
    }
    png_read_image(h.png, rows.data());
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = row8[i];
  }
  png_read_end(h.png, nullptr);
  return Grid<std::uint16_t>(size, std::move(pixels));
}

/// Read any PNG as 8-bit RGB: palette and grayscale expand, 16-bit strips
/// to 8, alpha is dropped.
inline RgbImage read_png_rgb8(const std::string& path) {
  detail::PngReadHandle h;
  detail::open_read(h, path);

  ImageSize size;
  std::vector<Rgb> pixels;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(h.png))) throw PngError("failed to decode " + path);

  png_init_io(h.png, h.fp);
  png_read_info(h.png, h.info);
  size = detail::checked_size(h.png, h.info, path);

  const int color = png_get_color_type(h.png, h.info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(h.png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (png_get_bit_depth(h.png, h.info) < 8) png_set_expand_gray_1_2_4_to_8(h.png);
    png_set_gray_to_rgb(h.png);
  }
  if (png_get_valid(h.png, h.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(h.png);
  if (png_get_bit_depth(h.png, h.info) == 16) png_set_strip_16(h.png);
  png_set_strip_alpha(h.png);
  png_read_update_info(h.png, h.info);

  if (png_get_channels(h.png, h.info) != 3 || png_get_bit_depth(h.png, h.info) != 8) {
    throw PngError(path + ": could not normalize to 8-bit RGB");
  }
  pixels.assign(size.pixel_count(), Rgb{});
  rows.resize(size.height);
  static_assert(sizeof(Rgb) == 3);
  for (int y = 0; y < size.height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(pixels.data() +
                                          static_cast<std::size_t>(y) * size.width);
  }
  png_read_image(h.png, rows.data());
  png_read_end(h.png, nullptr);
  return RgbImage(size, std::move(pixels));
}

inline void write_png_gray16(const std::string& path, const Grid<std::uint16_t>& img) {
  detail::PngWriteHandle h;
  detail::open_write(h, path);
  std::vector<png_bytep> rows(img.height());

  if (setjmp(png_jmpbuf(h.png))) throw PngError("failed to encode " + path);

  png_init_io(h.png, h.fp);
  png_set_IHDR(h.png, h.info, img.width(), img.height(), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(h.png, h.info);
  png_set_swap(h.png);
  const std::uint16_t* data = img.values().data();
  for (int y = 0; y < img.height(); ++y) {
    rows[y] = reinterpret_cast<png_bytep>(
        const_cast<std::uint16_t*>(data + static_cast<std::size_t>(y) * img.width()));
  }
  png_write_image(h.png, rows.data());
  png_write_end(h.png, nullptr);
}

inline void write_png_gray8(const std::string& path, const Grid<std::uint8_t>& img) {
  detail::PngWriteHandle h;
  detail::open_write(h, path);
  std::vector<png_bytep> rows(img.height());

  if (setjmp(png_jmpbuf(h.png))) throw PngError("failed to encode " + path);

  png_init_io(h.png, h.fp);
  png_set_IHDR(h.png, h.info, img.width(), img.height(), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(h.png, h.info);
  const std::uint8_t* data = img.values().data();
  for (int y = 0; y < img.height(); ++y) {
    rows[y] = const_cast<png_bytep>(data + static_cast<std::size_t>(y) * img.width());
  }
  png_write_image(h.png, rows.data());
  png_write_end(h.png, nullptr);
}

namespace detail {

template <typename PixelT>
inline void write_png_color(const std::string& path, const Grid<PixelT>& img, int color_type,
                            int channels) {
  PngWriteHandle h;
  open_write(h, path);
  std::vector<png_bytep> rows(img.height());

  if (setjmp(png_jmpbuf(h.png))) throw PngError("failed to encode " + path);

  png_init_io(h.png, h.fp);
  png_set_IHDR(h.png, h.info, img.width(), img.height(), 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(h.png, h.info);
  static_assert(sizeof(PixelT) == 3 || sizeof(PixelT) == 4);
  (void)channels;
  const PixelT* data = img.values().data();
  for (int y = 0; y < img.height(); ++y) {
    rows[y] = reinterpret_cast<png_bytep>(
        const_cast<PixelT*>(data + static_cast<std::size_t>(y) * img.width()));
  }
  png_write_image(h.png, rows.data());
  png_write_end(h.png, nullptr);
}

}  // namespace detail

inline void write_png_rgb8(const std::string& path, const RgbImage& img) {
  detail::write_png_color(path, img, PNG_COLOR_TYPE_RGB, 3);
}

inline void write_png_rgba8(const std::string& path, const RgbaImage& img) {
  detail::write_png_color(path, img, PNG_COLOR_TYPE_RGB_ALPHA, 4);
}

// ---------------------------------------------------------------------------
// Typed wrappers for the on-disk scene formats
// ---------------------------------------------------------------------------

inline LabelMap read_label_map(const std::string& path) {
  Grid<std::uint16_t> raw = read_png_gray16(path);
  std::vector<std::uint32_t> labels(raw.values().begin(), raw.values().end());
  return LabelMap(raw.size(), std::move(labels));
}

inline void write_label_map(const std::string& path, const LabelMap& lm) {
  std::vector<std::uint16_t> out(lm.labels().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint32_t v = lm.labels()[i];
    if (v > 0xFFFF) {
      throw IoError("label id " + std::to_string(v) + " exceeds 16-bit range for " + path);
    }
    out[i] = static_cast<std::uint16_t>(v);
  }
  write_png_gray16(path, Grid<std::uint16_t>(lm.size(), std::move(out)));
}

/// Any nonzero sample reads as foreground.
inline BinaryMask read_mask(const std::string& path) {
  Grid<std::uint16_t> raw = read_png_gray16(path);
  BinaryMask m(raw.size(), 0);
  for (std::size_t i = 0; i < raw.values().size(); ++i) m.values()[i] = (raw.values()[i] != 0);
  return m;
}

inline void write_mask(const std::string& path, const BinaryMask& m) {
  Grid<std::uint8_t> out(m.size(), 0);
  for (std::size_t i = 0; i < m.values().size(); ++i) out.values()[i] = m.values()[i] ? 255 : 0;
  write_png_gray8(path, out);
}

inline DepthImage read_depth(const std::string& path) { return read_png_gray16(path); }
inline void write_depth(const std::string& path, const DepthImage& img) {
  write_png_gray16(path, img);
}

}  // namespace beeer
