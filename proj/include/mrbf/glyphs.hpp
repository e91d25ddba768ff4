// Synthetic lower-case glyph rendering from built-in stroke skeletons.
//
// Template coordinates live in a unit box, y growing downward. Vertical
// metrics: ascender top ~0.05, x-height band [0.34, 0.70], descender bottom
// ~0.95. With the default canvas margin this puts ascender ink above 0.25 of
// the canvas height and descender ink below 0.75, so the default zone bands
// classify every letter correctly by construction.
//
// Mirror pairs (b/d, p/q) and the rotation pair n/u are drawn with deliberate
// shape asymmetries: moment invariants cannot tell exact reflections apart,
// and handwriting never produces exact reflections either.
#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "mrbf/raster.hpp"

namespace mrbf {

struct GlyphSpec {
  char label = 'a';                  // 'a'..'z'
  int canvas_width = 128;
  int canvas_height = 128;
  AffineMap affine;                  // applied about the canvas center, in pixels
  double noise_rate = 0.0;           // in [0, 0.5]
  std::uint64_t seed = 0;
  double stroke_width = 0.085;       // fraction of the glyph box side
  double margin = 0.06;              // canvas fraction kept clear around the box
};

namespace glyph_detail {

using Point = std::array<double, 2>;
using Stroke = std::vector<Point>;

inline Stroke arc(double cx, double cy, double rx, double ry, double deg0, double deg1) {
  const double rad = 3.14159265358979323846 / 180.0;
  const int n = std::max(8, static_cast<int>(std::ceil(std::abs(deg1 - deg0) / 10.0)));
  Stroke s;
  s.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double a = (deg0 + (deg1 - deg0) * i / n) * rad;
    s.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
  }
  return s;
}

inline Stroke dot(double cx, double cy, double r = 0.03) { return arc(cx, cy, r, r, 0, 360); }

struct Template {
  std::vector<Stroke> strokes;
};

// Hand-authored skeletons. Angle convention: 0 deg = +x, 90 deg = +y (down),
// so 270 deg is the top of a circle.
inline const std::map<char, Template>& templates() {
  static const std::map<char, Template> t = [] {
    std::map<char, Template> m;
    m['a'] = {{arc(0.45, 0.52, 0.17, 0.18, 0, 360),
               {{0.62, 0.34}, {0.62, 0.70}}}};
    m['b'] = {{{{0.30, 0.05}, {0.30, 0.70}},
               arc(0.47, 0.53, 0.17, 0.17, 0, 360)}};
    m['c'] = {{arc(0.48, 0.52, 0.18, 0.18, 300, 60)}};
    m['d'] = {{{{0.64, 0.08}, {0.64, 0.70}},
               arc(0.455, 0.515, 0.185, 0.185, 0, 360)}};
    m['e'] = {{{{0.30, 0.52}, {0.64, 0.52}},
               arc(0.47, 0.52, 0.17, 0.18, 360, 55)}};
    m['f'] = {{arc(0.50, 0.17, 0.13, 0.12, 300, 180),
               {{0.37, 0.17}, {0.37, 0.90}},
               {{0.24, 0.38}, {0.52, 0.38}}}};
    m['g'] = {{arc(0.45, 0.52, 0.16, 0.17, 0, 360),
               {{0.61, 0.34}, {0.61, 0.78}},
               arc(0.45, 0.78, 0.16, 0.14, 0, 160)}};
    m['h'] = {{{{0.30, 0.05}, {0.30, 0.70}},
               arc(0.47, 0.54, 0.17, 0.20, 180, 360),
               {{0.64, 0.54}, {0.64, 0.70}}}};
    m['i'] = {{dot(0.50, 0.18),
               {{0.50, 0.34}, {0.50, 0.70}}}};
    m['j'] = {{dot(0.55, 0.18),
               {{0.55, 0.34}, {0.55, 0.80}},
               arc(0.41, 0.80, 0.14, 0.13, 0, 140)}};
    m['k'] = {{{{0.30, 0.05}, {0.30, 0.70}},
               {{0.30, 0.53}, {0.63, 0.35}},
               {{0.41, 0.47}, {0.64, 0.70}}}};
    m['l'] = {{{{0.50, 0.05}, {0.50, 0.70}}}};
    m['m'] = {{{{0.22, 0.34}, {0.22, 0.70}},
               arc(0.36, 0.50, 0.14, 0.16, 180, 360),
               {{0.50, 0.50}, {0.50, 0.70}},
               arc(0.64, 0.50, 0.14, 0.16, 180, 360),
               {{0.78, 0.50}, {0.78, 0.70}}}};
    m['n'] = {{{{0.28, 0.34}, {0.28, 0.70}},
               arc(0.50, 0.54, 0.22, 0.20, 180, 360),
               {{0.72, 0.54}, {0.72, 0.70}}}};
    m['o'] = {{arc(0.50, 0.52, 0.19, 0.18, 0, 360)}};
    m['p'] = {{{{0.30, 0.34}, {0.30, 0.92}},
               arc(0.47, 0.52, 0.17, 0.18, 0, 360)}};
    m['q'] = {{arc(0.51, 0.53, 0.15, 0.17, 0, 360),
               {{0.66, 0.34}, {0.66, 0.90}},
               {{0.66, 0.90}, {0.76, 0.82}}}};
    m['r'] = {{{{0.34, 0.34}, {0.34, 0.70}},
               {{0.34, 0.46}, {0.40, 0.37}, {0.50, 0.34}, {0.60, 0.365}}}};
    m['s'] = {{{{0.62, 0.385}, {0.55, 0.345}, {0.45, 0.34}, {0.38, 0.38},
                {0.36, 0.44}, {0.42, 0.50}, {0.52, 0.535}, {0.60, 0.575},
                {0.62, 0.635}, {0.57, 0.685}, {0.47, 0.70}, {0.38, 0.66}}}};
    m['t'] = {{{{0.48, 0.10}, {0.48, 0.70}},
               {{0.32, 0.36}, {0.66, 0.36}}}};
    m['u'] = {{{{0.30, 0.34}, {0.30, 0.56}},
               arc(0.50, 0.56, 0.20, 0.14, 180, 0),
               {{0.70, 0.34}, {0.70, 0.70}}}};
    m['v'] = {{{{0.30, 0.34}, {0.50, 0.70}, {0.70, 0.34}}}};
    m['w'] = {{{{0.20, 0.34}, {0.35, 0.70}, {0.50, 0.40}, {0.65, 0.70}, {0.80, 0.34}}}};
    m['x'] = {{{{0.32, 0.34}, {0.68, 0.70}},
               {{0.68, 0.34}, {0.32, 0.70}}}};
    m['y'] = {{{{0.30, 0.34}, {0.50, 0.70}},
               {{0.70, 0.34}, {0.38, 0.92}}}};
    m['z'] = {{{{0.34, 0.34}, {0.66, 0.34}, {0.34, 0.70}, {0.66, 0.70}}}};
    return m;
  }();
  return t;
}

inline double point_segment_dist2(double px, double py, const Point& a, const Point& b) {
  const double vx = b[0] - a[0], vy = b[1] - a[1];
  const double wx = px - a[0], wy = py - a[1];
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (a[0] + t * vx), dy = py - (a[1] + t * vy);
  return dx * dx + dy * dy;
}

struct Segment {
  Point a, b;
  double bx0, by0, bx1, by1;  // bbox
};

}  // namespace glyph_detail

inline BinaryImage render_glyph(const GlyphSpec& spec) {
  using namespace glyph_detail;
  if (spec.label < 'a' || spec.label > 'z')
    throw std::invalid_argument("render_glyph: label must be a lower-case letter");
  if (spec.canvas_width < 16 || spec.canvas_height < 16)
    throw std::invalid_argument("render_glyph: canvas too small");
  if (std::abs(spec.affine.det()) < 1e-12)
    throw std::invalid_argument("render_glyph: singular affine matrix");

  const Template& tpl = templates().at(spec.label);
  const int w = spec.canvas_width, h = spec.canvas_height;
  const double side = (1.0 - 2.0 * spec.margin) * std::min(w, h);
  const double offx = (w - side) / 2.0, offy = (h - side) / 2.0;
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double hw = 0.5 * spec.stroke_width * side;

  // template -> canvas pixels -> spec affine about the canvas center
  std::vector<Segment> segs;
  for (const Stroke& stroke : tpl.strokes) {
    std::vector<Point> pts;
    pts.reserve(stroke.size());
    for (const Point& p : stroke) {
      const double px = offx + p[0] * side, py = offy + p[1] * side;
      auto q = spec.affine.apply(px - cx, py - cy);
      pts.push_back({q[0] + cx, q[1] + cy});
    }
    for (const Point& p : pts)
      if (p[0] - hw < -0.5 || p[0] + hw > w - 0.5 || p[1] - hw < -0.5 || p[1] + hw > h - 0.5)
        throw std::invalid_argument("render_glyph: canvas too small for transformed template");
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      Segment s{pts[i], pts[i + 1], 0, 0, 0, 0};
      s.bx0 = std::min(s.a[0], s.b[0]) - hw;
      s.bx1 = std::max(s.a[0], s.b[0]) + hw;
      s.by0 = std::min(s.a[1], s.b[1]) - hw;
      s.by1 = std::max(s.a[1], s.b[1]) + hw;
      segs.push_back(s);
    }
  }

  // distance classify with 4x4 subsample refinement near the stroke boundary
  BinaryImage img(w, h);
  const double band = 0.80;  // worst-case subsample offset from the pixel center
  const int sub = 4;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double d2min = 1e30;
      for (const Segment& s : segs) {
        if (x < s.bx0 - band || x > s.bx1 + band || y < s.by0 - band || y > s.by1 + band)
          continue;
        d2min = std::min(d2min, point_segment_dist2(x, y, s.a, s.b));
        if (d2min == 0.0) break;
      }
      const double dmin = std::sqrt(d2min);
      if (dmin <= hw - band) {
        img.set(x, y, 1);
      } else if (dmin < hw + band) {
        int votes = 0;
        for (int sy = 0; sy < sub; ++sy)
          for (int sx = 0; sx < sub; ++sx) {
            const double px = x - 0.5 + (sx + 0.5) / sub;
            const double py = y - 0.5 + (sy + 0.5) / sub;
            for (const Segment& s : segs) {
              if (px < s.bx0 - 0.1 || px > s.bx1 + 0.1 || py < s.by0 - 0.1 || py > s.by1 + 0.1)
                continue;
              if (point_segment_dist2(px, py, s.a, s.b) <= hw * hw) {
                ++votes;
                break;
              }
            }
          }
        if (2 * votes > sub * sub) img.set(x, y, 1);
      }
    }
  }

  return spec.noise_rate > 0.0 ? add_noise(img, spec.noise_rate, spec.seed) : img;
}

}  // namespace mrbf
