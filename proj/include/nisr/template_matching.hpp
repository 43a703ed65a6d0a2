#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nisr/grid.hpp"
#include "nisr/image.hpp"
#include "nisr/log_gabor.hpp"
#include "nisr/matching.hpp"

namespace nisr {

/// Stack of orientation layers cropped around a center, jointly normalized to
/// unit Euclidean norm. Layout: layer-major, then row-major within a layer.
struct TemplateFeature {
  Point2 origin;  // integer center pixel
  int window = 0;
  int layers = 0;
  std::vector<double> values;

  double at(int layer, int r, int c) const {
    return values[(static_cast<std::size_t>(layer) * window + r) * window + c];
  }
};

struct CorrelationPeak {
  int dx = 0;
  int dy = 0;
  double peak_value = 0.0;
  RealGrid surface;  // filled only on request
};

/// Sensed image pulled into the reference frame: out(p) = sen(M^-1 p).
WarpResult resample_sensed(const GrayImage& sen, const SimilarityTransform& m, int ref_rows, int ref_cols);

/// Crops a window x window block from every layer around `center`
/// (rounded to the nearest pixel) and normalizes the stack.
/// Throws InvalidArgument when the window leaves the image or has no energy.
TemplateFeature build_template(const OrientationAmplitude& ao, const Point2& center, int window);

/// Normalizes a template in place to unit energy.
void normalize_template(TemplateFeature& t);

/// Removes each layer's mean, tapers it with a separable Hann window and
/// renormalizes. Crops taken from a larger image otherwise share their
/// boundary and mean, which pins the correlation peak at zero shift.
void apodize_template(TemplateFeature& t);

/// Phase correlation of two template stacks. The cross-power spectrum of the
/// 3D transforms is normalized to unit magnitude and inverted; the result is
/// read at orientation shift 0. (dx, dy) is the displacement of t2's content
/// relative to t1, unwrapped to [-window/2, window/2).
CorrelationPeak phase_correlate(const TemplateFeature& t1, const TemplateFeature& t2, bool keep_surface = false);

struct TemplateParams {
  int window = 64;
  double accept_threshold = 0.1;
  int orientations = 6;  // o_t
  /// Required fraction of valid resampled pixels inside a window.
  double min_valid_fraction = 1.0;
  bool apodize = true;
};

/// Accepts a peak that is strong enough and not farther than window / 4.
std::optional<CorrelationPeak> accept_peak(CorrelationPeak peak, const TemplateParams& params);

/// Rematches reference points by template phase correlation against the
/// resampled sensed image. `ref_ao` and `resampled_ao` must have the same
/// layer count. Returned sensed points are in original sensed coordinates;
/// points reprojecting outside the sensed image are dropped.
std::vector<Match> rematch(std::span<const Point2> ref_points, const OrientationAmplitude& ref_ao,
                           const OrientationAmplitude& resampled_ao, const MaskGrid& resampled_valid,
                           const SimilarityTransform& m, const TemplateParams& params, int sen_rows, int sen_cols);

}  // namespace nisr
