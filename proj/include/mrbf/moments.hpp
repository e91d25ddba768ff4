// Image moments and the three invariant descriptor families (Hu, Zernike,
// affine), plus feature-vector assembly and standardization.
//
// Conventions:
//   - raw moments are lattice sums over ink pixels: m_pq = sum x^p y^q
//   - central moments mu_pq are taken about the centroid
//   - normalized moments n_pq = mu_pq / mu_00^gamma, gamma = 1 + (p+q)/2
//   - Zernike values are computed from disk-normalized moments: centroid at
//     the origin, max ink radius scaled to 1, total mass scaled to 1
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrbf/raster.hpp"

namespace mrbf {

constexpr int kMomentOrder = 4;

struct MomentSet {
  int max_order = kMomentOrder;
  std::array<std::array<double, kMomentOrder + 1>, kMomentOrder + 1> raw{};
  std::array<std::array<double, kMomentOrder + 1>, kMomentOrder + 1> central{};
  std::array<std::array<double, kMomentOrder + 1>, kMomentOrder + 1> normalized{};
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  bool completed = false;

  double m(int p, int q) const { return raw[p][q]; }
  double mu(int p, int q) const { return central[p][q]; }
  double n(int p, int q) const { return normalized[p][q]; }
};

inline MomentSet raw_moments(const BinaryImage& img, int max_order = kMomentOrder) {
  if (max_order < 2 || max_order > kMomentOrder)
    throw std::invalid_argument("raw_moments: max_order outside [2, 4]");
  MomentSet ms;
  ms.max_order = max_order;
  bool any = false;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!img.at(x, y)) continue;
      any = true;
      double xp = 1.0;
      for (int p = 0; p <= max_order; ++p) {
        double xpyq = xp;
        for (int q = 0; p + q <= max_order; ++q) {
          ms.raw[p][q] += xpyq;
          xpyq *= y;
        }
        xp *= x;
      }
    }
  }
  if (!any) throw std::domain_error("raw_moments: image has no ink");
  return ms;
}

inline MomentSet central_and_normalized(MomentSet ms) {
  const double m00 = ms.raw[0][0];
  if (!(m00 > 0.0)) throw std::domain_error("central_and_normalized: m00 is zero");
  const double xbar = ms.raw[1][0] / m00;
  const double ybar = ms.raw[0][1] / m00;
  ms.centroid_x = xbar;
  ms.centroid_y = ybar;

  // binomial expansion of sum (x - xbar)^p (y - ybar)^q
  static constexpr int choose[5][5] = {
      {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
  for (int p = 0; p <= ms.max_order; ++p) {
    for (int q = 0; p + q <= ms.max_order; ++q) {
      double acc = 0.0;
      for (int i = 0; i <= p; ++i) {
        for (int j = 0; j <= q; ++j) {
          acc += choose[p][i] * choose[q][j] * std::pow(-xbar, p - i) * std::pow(-ybar, q - j) *
                 ms.raw[i][j];
        }
      }
      ms.central[p][q] = acc;
    }
  }

  for (int p = 0; p <= ms.max_order; ++p) {
    for (int q = 0; p + q <= ms.max_order; ++q) {
      if (p + q < 2) continue;
      const double gamma = 1.0 + (p + q) / 2.0;
      ms.normalized[p][q] = ms.central[p][q] / std::pow(m00, gamma);
    }
  }
  ms.completed = true;
  return ms;
}

inline MomentSet compute_moments(const BinaryImage& img) {
  return central_and_normalized(raw_moments(img, kMomentOrder));
}

// ---------------------------------------------------------------------------
// Hu invariants H1..H4.
//
// The plus-sign H1 = n20 + n02 is the rotation-invariant form;
// paper_literal_h1 switches to the printed n20 - n02.

struct HuDescriptor {
  double h1 = 0, h2 = 0, h3 = 0, h4 = 0;
};

inline HuDescriptor hu_moments(const MomentSet& ms, bool paper_literal_h1 = false) {
  if (!ms.completed) throw std::invalid_argument("hu_moments: normalized moments missing");
  const double n20 = ms.n(2, 0), n02 = ms.n(0, 2), n11 = ms.n(1, 1);
  const double n30 = ms.n(3, 0), n03 = ms.n(0, 3), n21 = ms.n(2, 1), n12 = ms.n(1, 2);
  HuDescriptor h;
  h.h1 = paper_literal_h1 ? n20 - n02 : n20 + n02;
  h.h2 = (n20 - n02) * (n20 - n02) + 4.0 * n11 * n11;
  h.h3 = (n30 - 3.0 * n12) * (n30 - 3.0 * n12) + (3.0 * n21 - n03) * (3.0 * n21 - n03);
  h.h4 = (n30 + n12) * (n30 + n12) + (n21 + n03) * (n21 + n03);
  return h;
}

// ---------------------------------------------------------------------------
// Zernike values Z00..Z44 from disk-normalized moments.

struct DiskMapping {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;  // 99th-percentile ink distance from the centroid
};

// Unit-disk normalizer. The radius is the 99%-mass quantile rather than the
// raw maximum: the extreme ink pixel moves by up to a pixel under resampling
// or a single noise speck, and order-4 disk moments amplify that radius
// jitter fourfold. The quantile is an order statistic over thousands of
// pixels and stays put.
inline DiskMapping disk_mapping(const BinaryImage& img, const MomentSet& ms) {
  DiskMapping d;
  d.center_x = ms.centroid_x;
  d.center_y = ms.centroid_y;
  std::vector<double> r2;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y)) {
        const double dx = x - d.center_x, dy = y - d.center_y;
        r2.push_back(dx * dx + dy * dy);
      }
  if (r2.empty()) return d;
  std::size_t k = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(r2.size())));
  k = std::min(r2.size(), std::max<std::size_t>(k, 1)) - 1;
  std::nth_element(r2.begin(), r2.begin() + static_cast<std::ptrdiff_t>(k), r2.end());
  d.radius = std::sqrt(r2[k]);
  return d;
}

struct ZernikeDescriptor {
  double z00 = 0, z20 = 0;
  std::complex<double> z22, z33, z31, z44;
};

inline ZernikeDescriptor zernike_moments(const MomentSet& ms, const DiskMapping& mapping) {
  if (!ms.completed) throw std::invalid_argument("zernike_moments: central moments missing");
  const double r = mapping.radius;
  if (!(r > 0.0)) throw std::domain_error("zernike_moments: zero ink radius");
  const double m00 = ms.mu(0, 0);

  // disk moments: centroid at origin, radius 1, unit mass
  auto d = [&](int p, int q) { return ms.mu(p, q) / (m00 * std::pow(r, p + q)); };
  const double pi = 3.14159265358979323846;
  using cplx = std::complex<double>;

  ZernikeDescriptor z;
  z.z00 = 1.0 / pi;  // m'00 = 1 under the mass normalization
  z.z22 = 3.0 * cplx(d(0, 2) - d(2, 0), -2.0 * d(1, 1)) / pi;
  z.z20 = 3.0 * (2.0 * d(2, 0) + 2.0 * d(0, 2) - 1.0) / pi;
  z.z33 = 4.0 * cplx(d(0, 3) - 3.0 * d(2, 1), d(3, 0) - 3.0 * d(1, 2)) / pi;
  z.z31 = 12.0 * cplx(d(0, 3) + d(2, 1), -(d(3, 0) + d(1, 2))) / pi;
  z.z44 = 5.0 * cplx(d(4, 0) - 6.0 * d(2, 2) + d(0, 4), 4.0 * (d(3, 1) - d(1, 3))) / pi;
  return z;
}

// ---------------------------------------------------------------------------
// Affine invariants A1..A3 over central moments.

struct AffineDescriptor {
  double a1 = 0, a2 = 0, a3 = 0;
};

inline AffineDescriptor affine_moments(const MomentSet& ms) {
  if (!ms.completed) throw std::invalid_argument("affine_moments: central moments missing");
  const double u00 = ms.mu(0, 0);
  if (!(u00 > 0.0)) throw std::domain_error("affine_moments: mu00 is zero");
  const double u20 = ms.mu(2, 0), u02 = ms.mu(0, 2), u11 = ms.mu(1, 1);
  const double u30 = ms.mu(3, 0), u03 = ms.mu(0, 3), u21 = ms.mu(2, 1), u12 = ms.mu(1, 2);

  AffineDescriptor a;
  a.a1 = (u20 * u02 - u11 * u11) / std::pow(u00, 4);
  a.a2 = (u30 * u30 * u03 * u03 - 6.0 * u30 * u21 * u12 * u03 + 4.0 * u30 * u12 * u12 * u12 +
          4.0 * u03 * u21 * u21 * u21 - 3.0 * u21 * u21 * u12 * u12) /
         std::pow(u00, 10);
  a.a3 = (u20 * (u21 * u03 - u12 * u12) - u11 * (u30 * u03 - u21 * u12) +
          u02 * (u30 * u12 - u21 * u21)) /
         std::pow(u00, 7);
  return a;
}

// ---------------------------------------------------------------------------
// Feature vectors.

enum class FeatureKind { hu, zernike, affine, mixed, full };

inline int feature_length(FeatureKind k) {
  switch (k) {
    case FeatureKind::hu: return 4;
    case FeatureKind::zernike: return 6;
    case FeatureKind::affine: return 3;
    case FeatureKind::mixed: return 5;
    case FeatureKind::full: return 13;
  }
  throw std::invalid_argument("feature_length: unknown kind");
}

inline std::string feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::hu: return "hu";
    case FeatureKind::zernike: return "zernike";
    case FeatureKind::affine: return "affine";
    case FeatureKind::mixed: return "mixed";
    case FeatureKind::full: return "full";
  }
  throw std::invalid_argument("feature_kind_name: unknown kind");
}

inline FeatureKind feature_kind_from_name(const std::string& s) {
  if (s == "hu") return FeatureKind::hu;
  if (s == "zernike") return FeatureKind::zernike;
  if (s == "affine") return FeatureKind::affine;
  if (s == "mixed") return FeatureKind::mixed;
  if (s == "full") return FeatureKind::full;
  throw std::invalid_argument("unknown feature kind: " + s);
}

struct FeatureVector {
  std::vector<double> values;
  FeatureKind kind = FeatureKind::full;
};

namespace detail {

inline void check_finite(const FeatureVector& fv, const char* who) {
  for (double v : fv.values)
    if (!std::isfinite(v)) throw std::domain_error(std::string(who) + ": non-finite feature");
}

}  // namespace detail

inline FeatureVector hu_vector(const HuDescriptor& h) {
  FeatureVector fv{{h.h1, h.h2, h.h3, h.h4}, FeatureKind::hu};
  detail::check_finite(fv, "hu_vector");
  return fv;
}

inline FeatureVector zernike_vector(const ZernikeDescriptor& z) {
  FeatureVector fv{{z.z00, std::abs(z.z22), z.z20, std::abs(z.z33), std::abs(z.z31),
                    std::abs(z.z44)},
                   FeatureKind::zernike};
  detail::check_finite(fv, "zernike_vector");
  return fv;
}

inline FeatureVector affine_vector(const AffineDescriptor& a) {
  FeatureVector fv{{a.a1, a.a2, a.a3}, FeatureKind::affine};
  detail::check_finite(fv, "affine_vector");
  return fv;
}

// The paper's reduced descriptor: the moments found most discriminative.
inline FeatureVector mixed_descriptor(const HuDescriptor& h, const ZernikeDescriptor& z,
                                      const AffineDescriptor& a) {
  FeatureVector fv{{a.a1, a.a2, h.h1, z.z00, std::abs(z.z31)}, FeatureKind::mixed};
  detail::check_finite(fv, "mixed_descriptor");
  return fv;
}

inline FeatureVector full_descriptor(const HuDescriptor& h, const ZernikeDescriptor& z,
                                     const AffineDescriptor& a) {
  FeatureVector fv{{h.h1, h.h2, h.h3, h.h4, a.a1, a.a2, a.a3, z.z00, std::abs(z.z22), z.z20,
                    std::abs(z.z33), std::abs(z.z31), std::abs(z.z44)},
                   FeatureKind::full};
  detail::check_finite(fv, "full_descriptor");
  return fv;
}

inline FeatureVector extract_features(const BinaryImage& img, FeatureKind kind,
                                      bool paper_literal_h1 = false) {
  const MomentSet ms = compute_moments(img);
  switch (kind) {
    case FeatureKind::hu: return hu_vector(hu_moments(ms, paper_literal_h1));
    case FeatureKind::zernike: return zernike_vector(zernike_moments(ms, disk_mapping(img, ms)));
    case FeatureKind::affine: return affine_vector(affine_moments(ms));
    case FeatureKind::mixed:
      return mixed_descriptor(hu_moments(ms, paper_literal_h1),
                              zernike_moments(ms, disk_mapping(img, ms)), affine_moments(ms));
    case FeatureKind::full:
      return full_descriptor(hu_moments(ms, paper_literal_h1),
                             zernike_moments(ms, disk_mapping(img, ms)), affine_moments(ms));
  }
  throw std::invalid_argument("extract_features: unknown kind");
}

// ---------------------------------------------------------------------------
// Standardization: per-dimension zero mean, unit variance.

struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;  // standard deviation, 1 for constant dimensions
};

inline FeatureVector apply_standardization(const FeatureVector& fv, const Standardization& st) {
  if (fv.values.size() != st.mean.size())
    throw std::invalid_argument("apply_standardization: dimension mismatch");
  FeatureVector out = fv;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = (out.values[i] - st.mean[i]) / st.scale[i];
  return out;
}

inline std::pair<std::vector<FeatureVector>, Standardization> standardize(
    const std::vector<FeatureVector>& features) {
  if (features.size() < 2) throw std::invalid_argument("standardize: need at least 2 vectors");
  const FeatureKind kind = features[0].kind;
  const std::size_t dim = features[0].values.size();
  for (const auto& f : features)
    if (f.kind != kind || f.values.size() != dim)
      throw std::invalid_argument("standardize: mixed feature kinds");

  Standardization st;
  st.mean.assign(dim, 0.0);
  st.scale.assign(dim, 1.0);
  const double n = static_cast<double>(features.size());
  for (const auto& f : features)
    for (std::size_t i = 0; i < dim; ++i) st.mean[i] += f.values[i];
  for (std::size_t i = 0; i < dim; ++i) st.mean[i] /= n;
  for (std::size_t i = 0; i < dim; ++i) {
    double var = 0.0;
    for (const auto& f : features) {
      const double d = f.values[i] - st.mean[i];
      var += d * d;
    }
    const double sd = std::sqrt(var / n);
    st.scale[i] = sd > 0.0 ? sd : 1.0;
  }

  std::vector<FeatureVector> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(apply_standardization(f, st));
  return {std::move(out), std::move(st)};
}

}  // namespace mrbf
