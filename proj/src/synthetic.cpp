#include "nisr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace nisr {

namespace {

bool inside_polygon(const std::vector<Point2>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2& a = poly[i];
    const Point2& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

void fill_polygon(RealGrid& img, const std::vector<Point2>& poly, double level) {
  double x0 = poly[0].x, x1 = poly[0].x, y0 = poly[0].y, y1 = poly[0].y;
  for (const Point2& p : poly) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int c0 = std::max(0, static_cast<int>(std::floor(x0)));
  const int c1 = std::min(img.cols() - 1, static_cast<int>(std::ceil(x1)));
  const int r0 = std::max(0, static_cast<int>(std::floor(y0)));
  const int r1 = std::min(img.rows() - 1, static_cast<int>(std::ceil(y1)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (inside_polygon(poly, c, r)) img(r, c) = level;
    }
  }
}

std::vector<Point2> ellipse_outline(double cx, double cy, double a, double b, double angle) {
  std::vector<Point2> poly;
  constexpr int kSegments = 48;
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  for (int k = 0; k < kSegments; ++k) {
    const double t = 2.0 * std::numbers::pi * k / kSegments;
    const double x = a * std::cos(t);
    const double y = b * std::sin(t);
    poly.push_back({cx + x * ca - y * sa, cy + x * sa + y * ca});
  }
  return poly;
}

}  // namespace

GrayImage textured_scene(int rows, int cols, std::uint64_t seed) {
  if (rows <= 0 || cols <= 0) throw InvalidArgument("scene dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  RealGrid img(rows, cols);
  const double fx = uniform(0.01, 0.04);
  const double fy = uniform(0.01, 0.04);
  const double phase = uniform(0.0, 2.0 * std::numbers::pi);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      img(r, c) = 0.5 + 0.08 * std::sin(2.0 * std::numbers::pi * (fx * c + fy * r) + phase);
    }
  }

  const double area = static_cast<double>(rows) * cols;
  const int n_shapes = std::max(8, static_cast<int>(area / 2600.0));
  const double max_size = std::max(8.0, std::min(rows, cols) / 6.0);
  for (int i = 0; i < n_shapes; ++i) {
    const double cx = uniform(0.0, cols);
    const double cy = uniform(0.0, rows);
    const double size = uniform(6.0, max_size);
    const double angle = uniform(0.0, std::numbers::pi);
    const double level = uniform(0.05, 0.95);
    const int kind = static_cast<int>(unit(rng) * 3.0);
    std::vector<Point2> poly;
    if (kind == 0) {
      const double w = size;
      const double h = size * uniform(0.3, 1.0);
      const double ca = std::cos(angle);
      const double sa = std::sin(angle);
      for (const auto& [u, v] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
        const double x = 0.5 * w * u;
        const double y = 0.5 * h * v;
        poly.push_back({cx + x * ca - y * sa, cy + x * sa + y * ca});
      }
    } else if (kind == 1) {
      poly = ellipse_outline(cx, cy, 0.5 * size, 0.5 * size * uniform(0.3, 1.0), angle);
    } else {
      const int corners = 3 + static_cast<int>(unit(rng) * 4.0);
      for (int k = 0; k < corners; ++k) {
        const double t = angle + 2.0 * std::numbers::pi * (k + uniform(-0.3, 0.3)) / corners;
        const double rad = 0.5 * size * uniform(0.5, 1.0);
        poly.push_back({cx + rad * std::cos(t), cy + rad * std::sin(t)});
      }
    }
    fill_polygon(img, poly, level);
  }
  return GrayImage::clamped(smooth(img, gaussian_kernel(0.7)));
}

CheckpointSet grid_checkpoints(const SimilarityTransform& truth, int ref_rows, int ref_cols, const MaskGrid& sen_valid,
                               int grid, int margin) {
  if (grid < 1) throw InvalidArgument("checkpoint grid must be positive");
  const SimilarityTransform to_sensed = truth.inverse();
  CheckpointSet out;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Point2 ref{ref_cols * (j + 0.5) / grid, ref_rows * (i + 0.5) / grid};
      const Point2 sen = to_sensed.apply(ref);
      const int sx = static_cast<int>(std::lround(sen.x));
      const int sy = static_cast<int>(std::lround(sen.y));
      bool ok = true;
      for (int dy = -margin; dy <= margin && ok; ++dy) {
        for (int dx = -margin; dx <= margin && ok; ++dx) {
          ok = sen_valid.contains(sy + dy, sx + dx) && sen_valid(sy + dy, sx + dx) != 0;
        }
      }
      if (ok) out.pairs.push_back({ref, sen});
    }
  }
  return out;
}

PlantedPair plant_similarity(const GrayImage& ref, double scale, double rotation_deg) {
  if (!(scale >= 1.0)) throw InvalidArgument("planted scale must be >= 1");
  const int rows = static_cast<int>(std::lround(ref.rows() / scale));
  const int cols = static_cast<int>(std::lround(ref.cols() / scale));
  if (rows < 1 || cols < 1) throw InvalidArgument("planted scale too large for the image");

  const double theta = rotation_deg * std::numbers::pi / 180.0;
  const Point2 c_ref{(ref.cols() - 1) / 2.0, (ref.rows() - 1) / 2.0};
  const Point2 c_sen{(cols - 1) / 2.0, (rows - 1) / 2.0};
  SimilarityTransform truth{scale, theta, 0.0, 0.0};
  const Point2 moved = truth.apply(c_sen);
  truth.tx = c_ref.x - moved.x;
  truth.ty = c_ref.y - moved.y;

  const GrayImage source = scale > 1.0 ? smooth(ref, gaussian_kernel(0.5 * std::sqrt(scale * scale - 1.0))) : ref;
  WarpResult warped = warp_bilinear(source, rows, cols, [&](Point2 p) { return truth.apply(p); });

  PlantedPair pair{std::move(warped.image), std::move(warped.valid), truth, {}};
  pair.checkpoints = grid_checkpoints(truth, ref.rows(), ref.cols(), pair.valid);
  return pair;
}

std::string_view to_string(IntensityRemap remap) {
  switch (remap) {
    case IntensityRemap::Gamma04: return "gamma0.4";
    case IntensityRemap::Gamma25: return "gamma2.5";
    case IntensityRemap::Invert: return "invert";
    case IntensityRemap::LocalContrast: return "local-contrast";
  }
  return "unknown";
}

GrayImage apply_gamma(const GrayImage& img, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  RealGrid out = img.grid();
  for (double& v : out.values()) v = std::pow(v, gamma);
  return GrayImage::clamped(std::move(out));
}

GrayImage apply_remap(const GrayImage& img, IntensityRemap remap) {
  switch (remap) {
    case IntensityRemap::Gamma04: return apply_gamma(img, 0.4);
    case IntensityRemap::Gamma25: return apply_gamma(img, 2.5);
    case IntensityRemap::Invert: {
      RealGrid out = img.grid();
      for (double& v : out.values()) v = 1.0 - v;
      return GrayImage::clamped(std::move(out));
    }
    case IntensityRemap::LocalContrast: {
      const GaussianKernel k = gaussian_kernel(16.0);
      const RealGrid& v = img.grid();
      RealGrid sq = v;
      for (double& x : sq.values()) x *= x;
      const RealGrid mean = smooth(v, k);
      const RealGrid mean_sq = smooth(sq, k);
      RealGrid out(v.rows(), v.cols());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double var = std::max(0.0, mean_sq[i] - mean[i] * mean[i]);
        const double z = (v[i] - mean[i]) / std::sqrt(var + 1e-4);
        out[i] = 1.0 / (1.0 + std::exp(-z));
      }
      return GrayImage::clamped(std::move(out));
    }
  }
  throw InvalidArgument("unknown remap");
}

PlantedPair remap_sensed(const PlantedPair& pair, IntensityRemap remap) {
  PlantedPair out = pair;
  RealGrid v = apply_remap(pair.sensed, remap).grid();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (pair.valid[i] == 0) v[i] = 0.0;
  }
  out.sensed = GrayImage::clamped(std::move(v));
  return out;
}

}  // namespace nisr
