#include "nisr/description.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nisr {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

bool disk_fits(const IndexGrid& map, int x, int y, double radius) {
  const int r = static_cast<int>(std::floor(radius));
  return x - r >= 0 && y - r >= 0 && x + r < map.cols() && y + r < map.rows();
}

// Centroid of the disk pixels carrying `value`, accumulated with the running
// update so no pixel list is materialized.
Point2 value_centroid(const IndexGrid& map, int x, int y, double radius, int value, int& count) {
  const int r = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  Point2 g{};
  count = 0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy > r2 || map(y + dy, x + dx) != value) continue;
      ++count;
      g.x += (dx - g.x) / count;
      g.y += (dy - g.y) / count;
    }
  }
  return g;
}

struct DirectionResult {
  double angle = 0.0;
  bool degenerate = false;
};

DirectionResult direction_to(const Point2& offset) {
  if (std::hypot(offset.x, offset.y) < 0.5) return {0.0, true};
  return {wrap_angle(std::atan2(offset.y, offset.x)), false};
}

}  // namespace

Point2 incremental_centroid(std::span<const Point2> points) {
  Point2 g{};
  std::size_t n = 0;
  for (const Point2& b : points) {
    ++n;
    g.x += (b.x - g.x) / static_cast<double>(n);
    g.y += (b.y - g.y) / static_cast<double>(n);
  }
  return g;
}

std::vector<int> disk_histogram(const IndexGrid& map, int levels, int x, int y, double radius) {
  if (!disk_fits(map, x, y, radius)) throw InvalidArgument("orientation disk leaves the index map");
  std::vector<int> hist(static_cast<std::size_t>(levels) + 1, 0);
  const int r = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      const int v = map(y + dy, x + dx);
      if (v < 1 || v > levels) throw InvalidArgument("index value outside [1, levels]");
      ++hist[v];
    }
  }
  return hist;
}

int histogram_mode(const std::vector<int>& histogram) {
  int best = 1;
  for (std::size_t k = 2; k < histogram.size(); ++k) {
    if (histogram[k] > histogram[best]) best = static_cast<int>(k);
  }
  return best;
}

OrientationEstimate primary_orientation(const IndexGrid& map, int levels, int x, int y, double radius,
                                        double secondary_ratio) {
  const std::vector<int> hist = disk_histogram(map, levels, x, y, radius);
  OrientationEstimate est;
  est.mode_index = histogram_mode(hist);
  est.mode_count = hist[est.mode_index];
  for (int k = 1; k <= levels; ++k) {
    if (k == est.mode_index) continue;
    if (hist[k] > est.second_count) {
      est.second_count = hist[k];
      est.second_index = k;
    }
  }

  int count = 0;
  const DirectionResult primary = direction_to(value_centroid(map, x, y, radius, est.mode_index, count));
  est.primary = primary.angle;
  est.low_confidence = primary.degenerate;

  if (est.second_index > 0 && est.second_count > secondary_ratio * est.mode_count) {
    est.secondary = direction_to(value_centroid(map, x, y, radius, est.second_index, count)).angle;
  }
  return est;
}

int remap_index(int k, int k_mode, int levels) {
  if (k < 1 || k > levels || k_mode < 1 || k_mode > levels) throw InvalidArgument("index outside [1, levels]");
  return k <= k_mode ? k + (levels - k_mode) : k - k_mode;
}

std::vector<int> remap_indices(std::span<const int> indices, int k_mode, int levels) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (int k : indices) out.push_back(remap_index(k, k_mode, levels));
  return out;
}

DescriptionMaps make_description_maps(const OrientationAmplitude& ao, bool double_map) {
  DescriptionMaps maps;
  maps.orientations = static_cast<int>(ao.size());
  if (double_map) {
    maps.pair = index_maps(ao);
  } else {
    maps.full = full_index_map(ao);
  }
  return maps;
}

bool window_fits(int rows, int cols, const FeaturePoint& feature, double angle, int window) {
  const double half = window / 2.0 - 0.5;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (const double u : {-half, half}) {
    for (const double v : {-half, half}) {
      const double px = feature.x + u * c - v * s;
      const double py = feature.y + u * s + v * c;
      if (px < 0.0 || py < 0.0 || px > cols - 1 || py > rows - 1) return false;
    }
  }
  return true;
}

bool window_histograms(const IndexGrid& map, int levels, int k_mode, const FeaturePoint& feature, double angle,
                       int window, int subregions, std::span<float> out) {
  if (window % subregions != 0) throw InvalidArgument("window must be divisible by the subregion count");
  if (out.size() != static_cast<std::size_t>(subregions) * subregions * levels) {
    throw InvalidArgument("histogram buffer has the wrong length");
  }
  if (!window_fits(map.rows(), map.cols(), feature, angle, window)) return false;

  std::fill(out.begin(), out.end(), 0.0f);
  std::vector<int> lookup(static_cast<std::size_t>(levels) + 1);
  for (int k = 1; k <= levels; ++k) lookup[k] = remap_index(k, k_mode, levels) - 1;

  const int cell = window / subregions;
  const double half = window / 2.0 - 0.5;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (int i = 0; i < window; ++i) {
    const double v = i - half;
    for (int j = 0; j < window; ++j) {
      const double u = j - half;
      const int px = static_cast<int>(std::lround(feature.x + u * c - v * s));
      const int py = static_cast<int>(std::lround(feature.y + u * s + v * c));
      const int bin = lookup[map(py, px)];
      const std::size_t region = static_cast<std::size_t>(i / cell) * subregions + j / cell;
      out[region * levels + bin] += 1.0f;
    }
  }
  return true;
}

int descriptor_length(int orientations, int subregions, bool double_map) {
  const int levels = double_map ? orientations / 2 : orientations;
  return (double_map ? 2 : 1) * levels * subregions * subregions;
}

std::optional<Descriptor> build_descriptor(const DescriptionMaps& maps, const FeaturePoint& feature, double angle,
                                           int mode, const DescriptorParams& params) {
  const bool pair = !maps.pair.odd.empty();
  const int length = descriptor_length(maps.orientations, params.subregions, pair);
  Descriptor d;
  d.values.assign(static_cast<std::size_t>(length), 0.0f);
  d.feature = feature;
  d.location = feature.original();
  d.orientation = angle;

  std::span<float> values(d.values);
  if (pair) {
    const int levels = maps.pair.levels;
    const std::size_t half = values.size() / 2;
    if (!window_histograms(maps.pair.odd, levels, mode, feature, angle, params.window, params.subregions,
                           values.first(half))) {
      return std::nullopt;
    }
    const int even_mode = histogram_mode(disk_histogram(maps.pair.even, levels, feature.x, feature.y,
                                                        params.window / 2.0));
    window_histograms(maps.pair.even, levels, even_mode, feature, angle, params.window, params.subregions,
                      values.last(half));
  } else if (!window_histograms(maps.full, maps.orientations, mode, feature, angle, params.window,
                                params.subregions, values)) {
    return std::nullopt;
  }

  double norm2 = 0.0;
  for (float v : d.values) norm2 += static_cast<double>(v) * v;
  if (norm2 == 0.0) return std::nullopt;
  const double inv = 1.0 / std::sqrt(norm2);
  for (float& v : d.values) v = static_cast<float>(v * inv);
  return d;
}

std::vector<Descriptor> describe_features(const DescriptionMaps& maps, std::span<const FeaturePoint> features,
                                          const DescriptorParams& params, int feature_index_offset) {
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const FeaturePoint& fa = features[a];
    const FeaturePoint& fb = features[b];
    if (fa.layer_id != fb.layer_id) return fa.layer_id < fb.layer_id;
    if (fa.y != fb.y) return fa.y < fb.y;
    return fa.x < fb.x;
  });

  const bool pair = !maps.pair.odd.empty();
  const IndexGrid& primary_map = pair ? maps.pair.odd : maps.full;
  const int levels = pair ? maps.pair.levels : maps.orientations;
  const double radius = params.window / 2.0;

  std::vector<Descriptor> out;
  for (std::size_t idx : order) {
    const FeaturePoint& f = features[idx];
    if (!disk_fits(primary_map, f.x, f.y, radius)) continue;
    const OrientationEstimate est =
        primary_orientation(primary_map, levels, f.x, f.y, radius, params.secondary_ratio);
    const int feature_index = feature_index_offset + static_cast<int>(idx);

    if (auto d = build_descriptor(maps, f, est.primary, est.mode_index, params)) {
      d->feature_index = feature_index;
      out.push_back(std::move(*d));
    }
    if (params.use_secondary && est.secondary) {
      if (auto d = build_descriptor(maps, f, *est.secondary, est.second_index, params)) {
        d->feature_index = feature_index;
        d->secondary = true;
        out.push_back(std::move(*d));
      }
    }
  }
  return out;
}

}  // namespace nisr
