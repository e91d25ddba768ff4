// Binary raster images: PGM I/O, affine resampling, flip noise and the
// structural probes (zone masses, hole count, stroke crossings) used by the
// root decision stage.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrbf/rng.hpp"

namespace mrbf {

// Pixel (col c, row r) sits at continuous coordinates x = c, y = r.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 1 = ink

  BinaryImage() = default;
  BinaryImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("BinaryImage: non-positive dimensions");
  }

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, std::uint8_t v) { pixels[static_cast<std::size_t>(y) * width + x] = v; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  int ink_count() const {
    int n = 0;
    for (std::uint8_t p : pixels) n += p;
    return n;
  }

  bool operator==(const BinaryImage& o) const {
    return width == o.width && height == o.height && pixels == o.pixels;
  }
};

struct InkBox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive; empty when x1 < x0
  bool empty() const { return x1 < x0; }
};

inline InkBox ink_bounding_box(const BinaryImage& img) {
  InkBox b{img.width, img.height, -1, -1};
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y)) {
        b.x0 = std::min(b.x0, x);
        b.y0 = std::min(b.y0, y);
        b.x1 = std::max(b.x1, x);
        b.y1 = std::max(b.y1, y);
      }
  return b;
}

inline BinaryImage crop_to_ink(const BinaryImage& img) {
  InkBox b = ink_bounding_box(img);
  if (b.empty()) throw std::domain_error("crop_to_ink: image has no ink");
  BinaryImage out(b.x1 - b.x0 + 1, b.y1 - b.y0 + 1);
  for (int y = b.y0; y <= b.y1; ++y)
    for (int x = b.x0; x <= b.x1; ++x) out.set(x - b.x0, y - b.y0, img.at(x, y));
  return out;
}

// ---------------------------------------------------------------------------
// PGM (P2 ascii / P5 binary, maxval <= 255). Values below 128 are ink.

namespace detail {

inline int next_pnm_int(std::istream& in) {
  // skips whitespace and '#' comments
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw std::runtime_error("pgm: truncated header");
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  int v;
  if (!(in >> v)) throw std::runtime_error("pgm: malformed header");
  return v;
}

}  // namespace detail

inline BinaryImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pgm: cannot open " + path);

  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || (m1 != '2' && m1 != '5'))
    throw std::runtime_error("pgm: unsupported magic in " + path);
  const bool binary = (m1 == '5');

  const int width = detail::next_pnm_int(in);
  const int height = detail::next_pnm_int(in);
  const int maxval = detail::next_pnm_int(in);
  if (width <= 0 || height <= 0) throw std::runtime_error("pgm: zero or negative dimensions");
  if (maxval <= 0 || maxval > 255) throw std::runtime_error("pgm: unsupported maxval");

  BinaryImage img(width, height);
  const std::size_t n = img.pixels.size();
  if (binary) {
    in.get();  // single whitespace after maxval
    std::vector<std::uint8_t> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw std::runtime_error("pgm: truncated pixel data");
    for (std::size_t i = 0; i < n; ++i) img.pixels[i] = buf[i] < 128 ? 1 : 0;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      int v;
      if (!(in >> v)) throw std::runtime_error("pgm: truncated pixel data");
      if (v < 0 || v > maxval) throw std::runtime_error("pgm: sample out of range");
      img.pixels[i] = v < 128 ? 1 : 0;
    }
  }
  return img;
}

// P5, maxval 255, ink -> 0, background -> 255.
inline void save_pgm(const BinaryImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pgm: cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<std::uint8_t> buf(img.pixels.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = img.pixels[i] ? 0 : 255;
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("pgm: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Affine maps p' = m * p + t over pixel coordinates.

struct AffineMap {
  std::array<std::array<double, 2>, 2> m{{{1.0, 0.0}, {0.0, 1.0}}};
  std::array<double, 2> t{0.0, 0.0};

  static AffineMap identity() { return {}; }

  static AffineMap rotation(double degrees) {
    const double rad = degrees * 3.14159265358979323846 / 180.0;
    AffineMap a;
    a.m = {{{std::cos(rad), -std::sin(rad)}, {std::sin(rad), std::cos(rad)}}};
    return a;
  }

  static AffineMap scaling(double sx, double sy) {
    AffineMap a;
    a.m = {{{sx, 0.0}, {0.0, sy}}};
    return a;
  }

  static AffineMap translation(double tx, double ty) {
    AffineMap a;
    a.t = {tx, ty};
    return a;
  }

  double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

  std::array<double, 2> apply(double x, double y) const {
    return {m[0][0] * x + m[0][1] * y + t[0], m[1][0] * x + m[1][1] * y + t[1]};
  }

  // this ∘ other: apply `other` first
  AffineMap compose(const AffineMap& other) const {
    AffineMap r;
    r.m[0][0] = m[0][0] * other.m[0][0] + m[0][1] * other.m[1][0];
    r.m[0][1] = m[0][0] * other.m[0][1] + m[0][1] * other.m[1][1];
    r.m[1][0] = m[1][0] * other.m[0][0] + m[1][1] * other.m[1][0];
    r.m[1][1] = m[1][0] * other.m[0][1] + m[1][1] * other.m[1][1];
    r.t[0] = m[0][0] * other.t[0] + m[0][1] * other.t[1] + t[0];
    r.t[1] = m[1][0] * other.t[0] + m[1][1] * other.t[1] + t[1];
    return r;
  }

  AffineMap inverse() const {
    const double d = det();
    if (std::abs(d) < 1e-12) throw std::invalid_argument("AffineMap: singular matrix");
    AffineMap r;
    r.m = {{{m[1][1] / d, -m[0][1] / d}, {-m[1][0] / d, m[0][0] / d}}};
    r.t[0] = -(r.m[0][0] * t[0] + r.m[0][1] * t[1]);
    r.t[1] = -(r.m[1][0] * t[0] + r.m[1][1] * t[1]);
    return r;
  }
};

namespace detail {

// deterministic per-subsample jitter in [0, 1)
inline double subsample_jitter(std::uint64_t ox, std::uint64_t oy, std::uint64_t s,
                               std::uint64_t axis) {
  std::uint64_t z = (ox << 40) ^ (oy << 20) ^ (s << 2) ^ axis;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return (z >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Resamples `img` under `map`. The output canvas covers the transformed ink
// bounding box; each output pixel is set by majority vote over
// supersample_factor^2 inverse-mapped subsamples. Subsample positions are
// jittered inside their strata by a deterministic hash: a regular subsample
// grid beats against the pixel lattice and systematically erodes or dilates
// straight edges, which shows up as a multi-percent bias in second moments.
inline BinaryImage apply_affine(const BinaryImage& img, const AffineMap& map,
                                int supersample_factor = 4) {
  if (supersample_factor < 1) throw std::invalid_argument("apply_affine: supersample_factor < 1");
  const AffineMap inv = map.inverse();  // throws on singular matrix

  InkBox box = ink_bounding_box(img);
  if (box.empty()) throw std::domain_error("apply_affine: image has no ink");

  // Transform the corners of the ink pixel areas (centers +/- 0.5).
  double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
  for (double cx : {box.x0 - 0.5, box.x1 + 0.5})
    for (double cy : {box.y0 - 0.5, box.y1 + 0.5}) {
      auto p = map.apply(cx, cy);
      minx = std::min(minx, p[0]);
      maxx = std::max(maxx, p[0]);
      miny = std::min(miny, p[1]);
      maxy = std::max(maxy, p[1]);
    }

  const int gx0 = static_cast<int>(std::floor(minx));
  const int gy0 = static_cast<int>(std::floor(miny));
  const int gx1 = static_cast<int>(std::ceil(maxx));
  const int gy1 = static_cast<int>(std::ceil(maxy));
  const long long w = static_cast<long long>(gx1) - gx0 + 1;
  const long long h = static_cast<long long>(gy1) - gy0 + 1;
  if (w <= 0 || h <= 0 || w * h > 64LL * 1024 * 1024)
    throw std::invalid_argument("apply_affine: output canvas too large");

  BinaryImage out(static_cast<int>(w), static_cast<int>(h));
  const int s = supersample_factor;
  const int votes = s * s;
  for (int oy = 0; oy < out.height; ++oy) {
    for (int ox = 0; ox < out.width; ++ox) {
      int ink = 0;
      for (int sy = 0; sy < s; ++sy) {
        const double jy = detail::subsample_jitter(ox, oy, static_cast<std::uint64_t>(sy) * s, 1);
        const double py = gy0 + oy - 0.5 + (sy + jy) / s;
        for (int sx = 0; sx < s; ++sx) {
          const double jx =
              detail::subsample_jitter(ox, oy, static_cast<std::uint64_t>(sy) * s + sx, 0);
          const double px = gx0 + ox - 0.5 + (sx + jx) / s;
          auto q = inv.apply(px, py);
          const int ix = static_cast<int>(std::lround(q[0]));
          const int iy = static_cast<int>(std::lround(q[1]));
          if (img.in_bounds(ix, iy) && img.at(ix, iy)) ++ink;
        }
      }
      // exact ties broken by hash so the effective threshold sits at
      // coverage 1/2 rather than (votes/2 + 1) / votes
      const bool tie_ink = detail::subsample_jitter(ox, oy, 0x7F, 2) < 0.5;
      if (2 * ink > votes || (2 * ink == votes && tie_ink)) out.set(ox, oy, 1);
    }
  }
  return out;
}

// Each pixel flips independently with the given probability; deterministic
// for a fixed seed.
inline BinaryImage add_noise(const BinaryImage& img, double flip_probability, std::uint64_t seed) {
  if (!(flip_probability >= 0.0 && flip_probability <= 0.5))
    throw std::invalid_argument("add_noise: flip_probability outside [0, 0.5]");
  BinaryImage out = img;
  if (flip_probability == 0.0) return out;
  Rng rng(seed);
  for (auto& p : out.pixels)
    if (rng.unit() < flip_probability) p ^= 1;
  return out;
}

// 3x3 majority filter; removes salt-and-pepper flips while keeping strokes of
// two or more pixels intact. Pixels outside the canvas count as background.
inline BinaryImage despeckle(const BinaryImage& img) {
  BinaryImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      int ink = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (img.in_bounds(nx, ny)) ink += img.at(nx, ny);
        }
      if (ink >= 5) out.set(x, y, 1);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Structural probes.

struct ZoneProfile {
  long ascender_mass = 0;
  long central_mass = 0;
  long descender_mass = 0;
  int top_band_row = 0;
  int bottom_band_row = 0;

  long total() const { return ascender_mass + central_mass + descender_mass; }
};

// Ink counts in the row bands [0, top), [top, bottom), [bottom, height).
inline ZoneProfile zone_profile(const BinaryImage& img, int top_band_row, int bottom_band_row) {
  if (!(0 < top_band_row && top_band_row < bottom_band_row && bottom_band_row < img.height))
    throw std::invalid_argument("zone_profile: band rows out of order");
  ZoneProfile z;
  z.top_band_row = top_band_row;
  z.bottom_band_row = bottom_band_row;
  for (int y = 0; y < img.height; ++y) {
    long row_ink = 0;
    for (int x = 0; x < img.width; ++x) row_ink += img.at(x, y);
    if (y < top_band_row)
      z.ascender_mass += row_ink;
    else if (y < bottom_band_row)
      z.central_mass += row_ink;
    else
      z.descender_mass += row_ink;
  }
  return z;
}

// Number of 4-connected background regions not touching the image border.
inline int count_holes(const BinaryImage& img) {
  const int w = img.width, h = img.height;
  std::vector<std::uint8_t> visited(img.pixels.size(), 0);
  std::vector<int> stack;

  auto flood = [&](int start) {
    stack.clear();
    stack.push_back(start);
    visited[start] = 1;
    while (!stack.empty()) {
      const int idx = stack.back();
      stack.pop_back();
      const int x = idx % w, y = idx / w;
      const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (auto& n : nbr) {
        if (n[0] < 0 || n[0] >= w || n[1] < 0 || n[1] >= h) continue;
        const int ni = n[1] * w + n[0];
        if (!visited[ni] && !img.pixels[ni]) {
          visited[ni] = 1;
          stack.push_back(ni);
        }
      }
    }
  };

  // mark background reachable from the border
  for (int x = 0; x < w; ++x) {
    if (!img.at(x, 0) && !visited[x]) flood(x);
    const int b = (h - 1) * w + x;
    if (!img.pixels[b] && !visited[b]) flood(b);
  }
  for (int y = 0; y < h; ++y) {
    const int l = y * w, r = y * w + (w - 1);
    if (!img.pixels[l] && !visited[l]) flood(l);
    if (!img.pixels[r] && !visited[r]) flood(r);
  }

  // remaining background components are holes
  int holes = 0;
  for (int i = 0; i < w * h; ++i) {
    if (!img.pixels[i] && !visited[i]) {
      ++holes;
      flood(i);
    }
  }
  return holes;
}

// Background -> ink transitions along the row nearest each fractional height.
inline std::vector<int> crossing_counts(const BinaryImage& img,
                                        const std::vector<double>& row_fractions) {
  if (row_fractions.empty()) throw std::invalid_argument("crossing_counts: empty row_fractions");
  std::vector<int> counts;
  counts.reserve(row_fractions.size());
  for (double f : row_fractions) {
    if (!(f >= 0.0 && f <= 1.0))
      throw std::invalid_argument("crossing_counts: fraction outside [0, 1]");
    const int y = static_cast<int>(std::lround(f * (img.height - 1)));
    int c = 0;
    std::uint8_t prev = 0;
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t cur = img.at(x, y);
      if (cur && !prev) ++c;
      prev = cur;
    }
    counts.push_back(c);
  }
  return counts;
}

}  // namespace mrbf
