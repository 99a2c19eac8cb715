// PredictionBundle: the binary exchange file carrying foreground, center,
// offset, and error-estimate planes between external predictors and this
// toolkit.
//
// Wire format, all little-endian:
//   bytes 0-3    magic "BEER"
//   bytes 4-7    format version, u32 (currently 1)
//   bytes 8-11   width, u32
//   bytes 12-15  height, u32
//   bytes 16-19  plane presence bitfield, u32
//                  bit 0 foreground, bit 1 center, bit 2 offset, bit 3 error
//   then the present plane groups in that order, each plane w*h f32
//   row-major: foreground (1), center (1), offset (dx, dy), error
//   (tp, tn, fp, fn).
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "beeer/core.hpp"
#include "beeer/errors.hpp"
#include "beeer/losses.hpp"
#include "beeer/represent.hpp"

namespace beeer {

static_assert(std::endian::native == std::endian::little,
              "bundle I/O assumes a little-endian host");

enum class BundleErrorKind { Io, BadMagic, BadVersion, Truncated, BadValue };

class BundleError : public std::runtime_error {
 public:
  BundleError(BundleErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  BundleErrorKind kind() const { return kind_; }

 private:
  BundleErrorKind kind_;
};

inline constexpr std::uint32_t kBundleVersion = 1;

struct PredictionBundle {
  ImageSize size;
  std::optional<std::vector<float>> foreground;           // probabilities
  std::optional<std::vector<float>> center;               // probabilities
  std::optional<std::array<std::vector<float>, 2>> offset; // dx, dy in pixels
  std::optional<std::array<std::vector<float>, 4>> error;  // tp, tn, fp, fn

  bool operator==(const PredictionBundle&) const = default;
};

namespace detail {

inline std::vector<float> plane_from_grid(const Grid<double>& g) {
  std::vector<float> out(g.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(g.values()[i]);
  return out;
}

inline Grid<double> grid_from_plane(ImageSize size, const std::vector<float>& plane) {
  std::vector<double> out(plane.begin(), plane.end());
  return Grid<double>(size, std::move(out));
}

inline void check_bundle(const PredictionBundle& b, const std::string& where) {
  const std::size_t n = b.size.pixel_count();
  if (b.size.width < 1 || b.size.height < 1) {
    throw BundleError(BundleErrorKind::BadValue, where + ": invalid dimensions " + b.size.str());
  }
  auto check_prob_plane = [&](const std::vector<float>& p, const char* name) {
    if (p.size() != n) {
      throw BundleError(BundleErrorKind::BadValue,
                        where + ": " + name + " plane size does not match " + b.size.str());
    }
    for (const float v : p) {
      if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
        throw BundleError(BundleErrorKind::BadValue,
                          where + ": " + name + " plane holds a non-probability value");
      }
    }
  };
  if (b.foreground) check_prob_plane(*b.foreground, "foreground");
  if (b.center) check_prob_plane(*b.center, "center");
  if (b.offset) {
    for (const auto& plane : *b.offset) {
      if (plane.size() != n) {
        throw BundleError(BundleErrorKind::BadValue,
                          where + ": offset plane size does not match " + b.size.str());
      }
      for (const float v : plane) {
        if (!std::isfinite(v)) {
          throw BundleError(BundleErrorKind::BadValue,
                            where + ": offset plane holds a non-finite value");
        }
      }
    }
  }
  if (b.error) {
    for (const auto& plane : *b.error) check_prob_plane(plane, "error");
  }
}

}  // namespace detail

inline void write_bundle(const PredictionBundle& b, const std::string& path) {
  detail::check_bundle(b, path);
  const std::uint32_t presence = (b.foreground ? 1u : 0u) | (b.center ? 2u : 0u) |
                                 (b.offset ? 4u : 0u) | (b.error ? 8u : 0u);
  std::vector<char> buf;
  buf.reserve(20);
  auto put_u32 = [&buf](std::uint32_t v) {
    char raw[4];
    std::memcpy(raw, &v, 4);
    buf.insert(buf.end(), raw, raw + 4);
  };
  buf.insert(buf.end(), {'B', 'E', 'E', 'R'});
  put_u32(kBundleVersion);
  put_u32(static_cast<std::uint32_t>(b.size.width));
  put_u32(static_cast<std::uint32_t>(b.size.height));
  put_u32(presence);
  auto put_plane = [&buf](const std::vector<float>& p) {
    const char* raw = reinterpret_cast<const char*>(p.data());
    buf.insert(buf.end(), raw, raw + p.size() * sizeof(float));
  };
  if (b.foreground) put_plane(*b.foreground);
  if (b.center) put_plane(*b.center);
  if (b.offset) {
    put_plane((*b.offset)[0]);
    put_plane((*b.offset)[1]);
  }
  if (b.error) {
    for (const auto& plane : *b.error) put_plane(plane);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BundleError(BundleErrorKind::Io, "cannot open " + path + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw BundleError(BundleErrorKind::Io, "short write to " + path);
}

inline PredictionBundle read_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw BundleError(BundleErrorKind::Io, "cannot open " + path + " for reading");
  const std::streamsize actual = in.tellg();
  in.seekg(0);

  constexpr std::streamsize header_size = 20;
  if (actual < header_size) {
    throw BundleError(BundleErrorKind::Truncated,
                      path + ": expected at least " + std::to_string(header_size) +
                          " header bytes, got " + std::to_string(actual));
  }
  char header[header_size];
  in.read(header, header_size);
  if (!in) throw BundleError(BundleErrorKind::Io, "failed reading header of " + path);

  if (std::memcmp(header, "BEER", 4) != 0) {
    throw BundleError(BundleErrorKind::BadMagic, path + ": bad magic");
  }
  std::uint32_t version, width, height, presence;
  std::memcpy(&version, header + 4, 4);
  std::memcpy(&width, header + 8, 4);
  std::memcpy(&height, header + 12, 4);
  std::memcpy(&presence, header + 16, 4);
  if (version != kBundleVersion) {
    throw BundleError(BundleErrorKind::BadVersion,
                      path + ": unsupported format version " + std::to_string(version));
  }
  if (width < 1 || height < 1 || width > (1u << 24) || height > (1u << 24)) {
    throw BundleError(BundleErrorKind::BadValue, path + ": unreasonable dimensions");
  }
  if (presence > 15u) {
    throw BundleError(BundleErrorKind::BadValue, path + ": unknown bits in presence field");
  }

  const std::size_t n = static_cast<std::size_t>(width) * height;
  const int nplanes = ((presence & 1u) ? 1 : 0) + ((presence & 2u) ? 1 : 0) +
                      ((presence & 4u) ? 2 : 0) + ((presence & 8u) ? 4 : 0);
  const std::streamsize expected =
      header_size + static_cast<std::streamsize>(n * sizeof(float)) * nplanes;
  if (actual != expected) {
    throw BundleError(BundleErrorKind::Truncated, path + ": expected " +
                                                      std::to_string(expected) +
                                                      " bytes, got " + std::to_string(actual));
  }

  PredictionBundle b;
  b.size = ImageSize{static_cast<int>(width), static_cast<int>(height)};
  auto read_plane = [&]() {
    std::vector<float> plane(n);
    in.read(reinterpret_cast<char*>(plane.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
    if (!in) throw BundleError(BundleErrorKind::Io, "failed reading plane data of " + path);
    return plane;
  };
  if (presence & 1u) b.foreground = read_plane();
  if (presence & 2u) b.center = read_plane();
  if (presence & 4u) b.offset = std::array<std::vector<float>, 2>{read_plane(), read_plane()};
  if (presence & 8u) {
    b.error = std::array<std::vector<float>, 4>{read_plane(), read_plane(), read_plane(),
                                                read_plane()};
  }
  detail::check_bundle(b, path);
  return b;
}

// ---------------------------------------------------------------------------
// Conversions between bundle planes and in-memory types
// ---------------------------------------------------------------------------

/// Bundle synthesized from a label map: hard 0/1 foreground plane plus the
/// encoded center and offset planes, optionally the error planes.
inline PredictionBundle make_bundle(const LabelMap& lm, double sigma = 8.0,
                                    const ErrorMaps* error = nullptr) {
  PredictionBundle b;
  b.size = lm.size();
  std::vector<float> fg(lm.labels().size());
  for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = lm.labels()[i] ? 1.0f : 0.0f;
  b.foreground = std::move(fg);
  const EncodedIS enc = encode(lm, sigma);
  b.center = detail::plane_from_grid(enc.center);
  b.offset = std::array<std::vector<float>, 2>{detail::plane_from_grid(enc.offset.dx),
                                               detail::plane_from_grid(enc.offset.dy)};
  if (error) {
    std::array<std::vector<float>, 4> planes;
    for (int c = 0; c < 4; ++c) {
      planes[c].resize(error->codes().values().size());
      for (std::size_t i = 0; i < planes[c].size(); ++i) {
        planes[c][i] = (error->codes().values()[i] == c) ? 1.0f : 0.0f;
      }
    }
    b.error = std::move(planes);
  }
  return b;
}

inline CenterMap to_center_map(const PredictionBundle& b) {
  if (!b.center) throw BundleError(BundleErrorKind::BadValue, "bundle has no center plane");
  return detail::grid_from_plane(b.size, *b.center);
}

inline OffsetMap to_offset_map(const PredictionBundle& b) {
  if (!b.offset) throw BundleError(BundleErrorKind::BadValue, "bundle has no offset planes");
  return OffsetMap(detail::grid_from_plane(b.size, (*b.offset)[0]),
                   detail::grid_from_plane(b.size, (*b.offset)[1]));
}

inline ErrorProbabilities to_error_probabilities(const PredictionBundle& b) {
  if (!b.error) throw BundleError(BundleErrorKind::BadValue, "bundle has no error planes");
  return {detail::grid_from_plane(b.size, (*b.error)[0]),
          detail::grid_from_plane(b.size, (*b.error)[1]),
          detail::grid_from_plane(b.size, (*b.error)[2]),
          detail::grid_from_plane(b.size, (*b.error)[3])};
}

/// Threshold the foreground probability plane; p >= threshold is foreground.
inline BinaryMask foreground_mask(const PredictionBundle& b, double threshold = 0.5) {
  if (!b.foreground) {
    throw BundleError(BundleErrorKind::BadValue, "bundle has no foreground plane");
  }
  BinaryMask m(b.size, 0);
  for (std::size_t i = 0; i < m.values().size(); ++i) {
    m.values()[i] = ((*b.foreground)[i] >= threshold);
  }
  return m;
}

}  // namespace beeer
