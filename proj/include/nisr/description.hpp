#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nisr/detection.hpp"
#include "nisr/grid.hpp"
#include "nisr/log_gabor.hpp"

namespace nisr {

struct OrientationEstimate {
  double primary = 0.0;                  // radians in [0, 2*pi)
  std::optional<double> secondary;       // set when the second mode passes the ratio test
  int mode_index = 0;                    // k_mode
  int second_index = 0;                  // 0 when the disk holds a single value
  int mode_count = 0;
  int second_count = 0;
  bool low_confidence = false;           // centroid within 0.5 px of the feature
};

/// Running centroid: each new point b moves the centroid G of N points to
/// G + (b - G) / (N + 1).
Point2 incremental_centroid(std::span<const Point2> points);

/// Histogram of index values over the disk of `radius` around (x, y).
/// Entry k holds the count of value k; entry 0 is unused.
std::vector<int> disk_histogram(const IndexGrid& map, int levels, int x, int y, double radius);

/// Most frequent value in a histogram from disk_histogram (lowest wins ties).
int histogram_mode(const std::vector<int>& histogram);

/// Primary orientation from the centroid of the modal-index pixels in a disk.
/// Throws InvalidArgument when the disk does not fit in the map.
OrientationEstimate primary_orientation(const IndexGrid& map, int levels, int x, int y, double radius,
                                        double secondary_ratio = 0.8);

/// Circular shift that sends `k_mode` to `levels`; inputs and outputs lie in [1, levels].
int remap_index(int k, int k_mode, int levels);
std::vector<int> remap_indices(std::span<const int> indices, int k_mode, int levels);

struct DescriptorParams {
  int window = 72;             // l, layer pixels
  int subregions = 6;          // n
  double secondary_ratio = 0.8;
  bool use_secondary = true;   // Str.1
  bool double_map = true;      // Str.2
};

struct Descriptor {
  std::vector<float> values;
  FeaturePoint feature;
  Point2 location;             // original-image pixels
  double orientation = 0.0;
  int feature_index = -1;      // position in the described feature list
  bool secondary = false;
};

/// Index maps consumed by the descriptor: either the odd/even pair or a
/// single map over all orientations.
struct DescriptionMaps {
  IndexMapPair pair;
  IndexGrid full;
  int orientations = 0;        // o_max
};

DescriptionMaps make_description_maps(const OrientationAmplitude& ao, bool double_map);

/// True when every sample of the rotated l x l window lands inside the map.
bool window_fits(int rows, int cols, const FeaturePoint& feature, double angle, int window);

/// Histograms of remapped index values over an n x n partition of the window
/// rotated by `angle` about the feature (nearest-neighbor sampling). Writes
/// n * n * levels unnormalized counts into `out`. Returns false when the
/// window leaves the map.
bool window_histograms(const IndexGrid& map, int levels, int k_mode, const FeaturePoint& feature, double angle,
                       int window, int subregions, std::span<float> out);

/// Descriptor length for a configuration: 2 * (o/2) * n * n with the double
/// map, o * n * n without.
int descriptor_length(int orientations, int subregions, bool double_map);

/// Descriptor for one feature at a given angle. `mode` is the k_mode for the
/// first (odd or full) map; the even map always uses its own disk mode.
std::optional<Descriptor> build_descriptor(const DescriptionMaps& maps, const FeaturePoint& feature, double angle,
                                           int mode, const DescriptorParams& params);

/// Orientation assignment plus description for every feature that fits.
/// Output is ordered by (layer_id, y, x) with the secondary descriptor right
/// after its primary.
std::vector<Descriptor> describe_features(const DescriptionMaps& maps, std::span<const FeaturePoint> features,
                                          const DescriptorParams& params, int feature_index_offset = 0);

}  // namespace nisr
