#include "nisr/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nisr {

double fast_score(const RealGrid& map, int x, int y) {
  const double center = map(y, x);
  std::array<double, 16> diff{};
  for (std::size_t i = 0; i < kFastCircle.size(); ++i) {
    diff[i] = map(y + kFastCircle[i][1], x + kFastCircle[i][0]) - center;
  }
  double best_bright = -std::numeric_limits<double>::infinity();
  double best_dark = -std::numeric_limits<double>::infinity();
  for (int start = 0; start < 16; ++start) {
    double min_bright = std::numeric_limits<double>::infinity();
    double min_dark = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kFastArc; ++k) {
      const double d = diff[(start + k) % 16];
      min_bright = std::min(min_bright, d);
      min_dark = std::min(min_dark, -d);
    }
    best_bright = std::max(best_bright, min_bright);
    best_dark = std::max(best_dark, min_dark);
  }
  return std::max({best_bright, best_dark, 0.0});
}

RealGrid fast_score_map(const RealGrid& map) {
  RealGrid scores(map.rows(), map.cols());
  for (int y = 3; y < map.rows() - 3; ++y) {
    for (int x = 3; x < map.cols() - 3; ++x) scores(y, x) = fast_score(map, x, y);
  }
  return scores;
}

RealGrid normalize_by_max(const RealGrid& map) {
  RealGrid out = map;
  if (out.empty()) return out;
  const double mx = *std::max_element(out.values().begin(), out.values().end());
  if (mx > 0.0) {
    for (double& v : out.values()) v /= mx;
  }
  return out;
}

std::vector<FeaturePoint> detect(const RealGrid& weighted, int layer_id, double layer_scale,
                                 const DetectionParams& params) {
  const RealGrid map = normalize_by_max(weighted);
  const int margin = std::max(params.border, 3);
  const int rows = map.rows();
  const int cols = map.cols();
  std::vector<FeaturePoint> points;
  if (rows <= 2 * margin || cols <= 2 * margin) return points;

  // Scores are needed one pixel beyond the margin for suppression.
  RealGrid scores(rows, cols);
  for (int y = std::max(3, margin - 1); y < std::min(rows - 3, rows - margin + 1); ++y) {
    for (int x = std::max(3, margin - 1); x < std::min(cols - 3, cols - margin + 1); ++x) {
      const double s = fast_score(map, x, y);
      if (s > params.threshold) scores(y, x) = s;
    }
  }

  for (int y = margin; y < rows - margin; ++y) {
    for (int x = margin; x < cols - margin; ++x) {
      const double s = scores(y, x);
      if (s <= 0.0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const double n = scores(y + dy, x + dx);
          // Plateaus keep their first pixel in raster order.
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (n > s || (earlier && n == s)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) points.push_back({x, y, layer_id, layer_scale, s});
    }
  }

  std::stable_sort(points.begin(), points.end(), [](const FeaturePoint& a, const FeaturePoint& b) {
    return a.response > b.response;
  });
  if (params.max_per_layer >= 0 && static_cast<int>(points.size()) > params.max_per_layer) {
    points.resize(params.max_per_layer);
  }
  return points;
}

std::vector<int> layer_quotas(const std::vector<LayerDetections>& layers, int max_total) {
  const std::size_t n = layers.size();
  std::vector<int> quota(n, 0);
  std::vector<bool> settled(n, false);
  int remaining = std::max(max_total, 0);

  // Water-filling: layers with fewer points than their share keep everything
  // and release the surplus to the rest.
  while (true) {
    long long pixels = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!settled[i]) pixels += layers[i].pixel_count;
    }
    if (pixels == 0) break;

    std::vector<double> share(n, 0.0);
    bool saturated = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (settled[i]) continue;
      share[i] = static_cast<double>(remaining) * layers[i].pixel_count / static_cast<double>(pixels);
      if (static_cast<double>(layers[i].points.size()) <= share[i]) {
        quota[i] = static_cast<int>(layers[i].points.size());
        remaining -= quota[i];
        settled[i] = true;
        saturated = true;
      }
    }
    if (saturated) continue;

    // Largest-remainder rounding of the proportional shares.
    int assigned = 0;
    std::vector<std::pair<double, std::size_t>> remainders;
    for (std::size_t i = 0; i < n; ++i) {
      if (settled[i]) continue;
      quota[i] = static_cast<int>(std::floor(share[i]));
      assigned += quota[i];
      remainders.emplace_back(share[i] - quota[i], i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int k = 0; k < remaining - assigned && k < static_cast<int>(remainders.size()); ++k) {
      ++quota[remainders[k].second];
    }
    break;
  }
  return quota;
}

std::vector<FeaturePoint> collect_features(const std::vector<LayerDetections>& layers, int max_total) {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.points.size();

  std::vector<FeaturePoint> out;
  out.reserve(std::min<std::size_t>(total, static_cast<std::size_t>(std::max(max_total, 0))));
  if (total <= static_cast<std::size_t>(std::max(max_total, 0))) {
    for (const auto& layer : layers) out.insert(out.end(), layer.points.begin(), layer.points.end());
    return out;
  }
  const std::vector<int> quota = layer_quotas(layers, max_total);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& pts = layers[i].points;
    out.insert(out.end(), pts.begin(), pts.begin() + std::min<std::ptrdiff_t>(quota[i], pts.size()));
  }
  return out;
}

}  // namespace nisr
