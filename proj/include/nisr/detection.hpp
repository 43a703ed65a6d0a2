#pragma once

#include <array>
#include <vector>

#include "nisr/grid.hpp"

namespace nisr {

struct FeaturePoint {
  int x = 0;  // layer pixel column
  int y = 0;  // layer pixel row
  int layer_id = 0;
  double layer_scale = 1.0;
  double response = 0.0;

  /// Location in original-image pixels.
  Point2 original() const { return {x * layer_scale, y * layer_scale}; }
};

/// Bresenham circle of radius 3 used by the segment test, clockwise from 12 o'clock.
inline constexpr std::array<std::array<int, 2>, 16> kFastCircle{{{0, -3},
                                                                 {1, -3},
                                                                 {2, -2},
                                                                 {3, -1},
                                                                 {3, 0},
                                                                 {3, 1},
                                                                 {2, 2},
                                                                 {1, 3},
                                                                 {0, 3},
                                                                 {-1, 3},
                                                                 {-2, 2},
                                                                 {-3, 1},
                                                                 {-3, 0},
                                                                 {-3, -1},
                                                                 {-2, -2},
                                                                 {-1, -3}}};

inline constexpr int kFastArc = 9;
inline constexpr int kFeatureBorder = 12;

/// Segment-test score: the largest threshold at which some run of 9
/// contiguous circle pixels is still entirely brighter (or entirely darker)
/// than the center. A pixel is a FAST corner iff its score exceeds the threshold.
double fast_score(const RealGrid& map, int x, int y);

/// Per-pixel score (0 inside the 3-pixel rim).
RealGrid fast_score_map(const RealGrid& map);

/// Scales a grid by its maximum when that maximum is positive.
RealGrid normalize_by_max(const RealGrid& map);

struct DetectionParams {
  double threshold = 0.05;
  int max_per_layer = 5000;
  int border = kFeatureBorder;
};

/// FAST-9 on the max-normalized weighted moment map, 3x3 non-maximum
/// suppression on the score, strongest `max_per_layer` kept. Results are sorted
/// by response (descending), ties by (y, x).
std::vector<FeaturePoint> detect(const RealGrid& weighted, int layer_id, double layer_scale,
                                 const DetectionParams& params);

struct LayerDetections {
  std::vector<FeaturePoint> points;  // sorted by response, descending
  long long pixel_count = 0;
};

/// Merges per-layer detections. When the total exceeds `max_total`, each
/// layer keeps its strongest points up to a quota proportional to its pixel
/// count; quota a layer cannot fill is redistributed. Output order is layer
/// order, then response.
std::vector<FeaturePoint> collect_features(const std::vector<LayerDetections>& layers, int max_total);

/// Quotas used by collect_features, exposed for testing.
std::vector<int> layer_quotas(const std::vector<LayerDetections>& layers, int max_total);

}  // namespace nisr
