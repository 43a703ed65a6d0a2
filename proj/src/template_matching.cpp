#include "nisr/template_matching.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "nisr/fft.hpp"

namespace nisr {

WarpResult resample_sensed(const GrayImage& sen, const SimilarityTransform& m, int ref_rows, int ref_cols) {
  if (!m.valid()) throw InvalidArgument("resampling needs a valid similarity transform");
  const SimilarityTransform to_sensed = m.inverse();
  return warp_bilinear(sen, ref_rows, ref_cols, [&](Point2 p) { return to_sensed.apply(p); });
}

void normalize_template(TemplateFeature& t) {
  double energy = 0.0;
  for (double v : t.values) energy += v * v;
  const double norm = std::sqrt(energy);
  if (!(norm > 1e-12)) throw InvalidArgument("template has no energy");
  for (double& v : t.values) v /= norm;
}

TemplateFeature build_template(const OrientationAmplitude& ao, const Point2& center, int window) {
  if (ao.empty()) throw InvalidArgument("template needs orientation layers");
  if (window <= 0) throw InvalidArgument("template window must be positive");
  const int cx = static_cast<int>(std::lround(center.x));
  const int cy = static_cast<int>(std::lround(center.y));
  const int x0 = cx - window / 2;
  const int y0 = cy - window / 2;
  const RealGrid& first = ao.front();
  if (x0 < 0 || y0 < 0 || x0 + window > first.cols() || y0 + window > first.rows()) {
    throw InvalidArgument("template window leaves the image");
  }

  TemplateFeature t;
  t.origin = {static_cast<double>(cx), static_cast<double>(cy)};
  t.window = window;
  t.layers = static_cast<int>(ao.size());
  t.values.reserve(static_cast<std::size_t>(t.layers) * window * window);
  for (const RealGrid& layer : ao) {
    if (!layer.same_shape(first)) throw InvalidArgument("orientation layers differ in shape");
    for (int r = 0; r < window; ++r) {
      for (int c = 0; c < window; ++c) t.values.push_back(layer(y0 + r, x0 + c));
    }
  }
  normalize_template(t);
  return t;
}

void apodize_template(TemplateFeature& t) {
  const int w = t.window;
  std::vector<double> taper(w);
  for (int i = 0; i < w; ++i) taper[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / w);
  const std::size_t plane = static_cast<std::size_t>(w) * w;
  for (int d = 0; d < t.layers; ++d) {
    double* layer = t.values.data() + d * plane;
    double mean = 0.0;
    for (std::size_t i = 0; i < plane; ++i) mean += layer[i];
    mean /= static_cast<double>(plane);
    for (int r = 0; r < w; ++r) {
      for (int c = 0; c < w; ++c) layer[r * w + c] = (layer[r * w + c] - mean) * taper[r] * taper[c];
    }
  }
  normalize_template(t);
}

CorrelationPeak phase_correlate(const TemplateFeature& t1, const TemplateFeature& t2, bool keep_surface) {
  if (t1.window != t2.window || t1.layers != t2.layers || t1.values.size() != t2.values.size()) {
    throw InvalidArgument("template shapes differ");
  }
  const int w = t1.window;
  const int depth = t1.layers;
  const std::size_t plane = static_cast<std::size_t>(w) * w;

  std::vector<std::complex<double>> f1(t1.values.begin(), t1.values.end());
  std::vector<std::complex<double>> f2(t2.values.begin(), t2.values.end());
  fft::forward_3d(f1, depth, w, w);
  fft::forward_3d(f2, depth, w, w);

  double max_mag = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i) {
    f2[i] *= std::conj(f1[i]);
    max_mag = std::max(max_mag, std::abs(f2[i]));
  }
  const double eps = 1e-12 * max_mag + 1e-300;

  // Inverse along the orientation axis evaluated at shift 0 is the sum over
  // orientation frequencies; the remaining 2D inverse gives the surface.
  ComplexGrid surface(w, w);
  for (int d = 0; d < depth; ++d) {
    for (std::size_t i = 0; i < plane; ++i) {
      const std::complex<double> x = f2[static_cast<std::size_t>(d) * plane + i];
      const double mag = std::abs(x);
      if (mag > eps) surface[i] += x / mag;
    }
  }
  fft::inverse_2d(surface);

  const double inv_n = 1.0 / static_cast<double>(f1.size());
  CorrelationPeak peak;
  peak.peak_value = -std::numeric_limits<double>::infinity();
  int best_r = 0;
  int best_c = 0;
  for (int r = 0; r < w; ++r) {
    for (int c = 0; c < w; ++c) {
      const double v = surface(r, c).real() * inv_n;
      if (v > peak.peak_value) {
        peak.peak_value = v;
        best_r = r;
        best_c = c;
      }
    }
  }
  peak.dx = best_c < (w + 1) / 2 ? best_c : best_c - w;
  peak.dy = best_r < (w + 1) / 2 ? best_r : best_r - w;
  if (keep_surface) {
    peak.surface = RealGrid(w, w);
    for (std::size_t i = 0; i < plane; ++i) peak.surface[i] = surface[i].real() * inv_n;
  }
  return peak;
}

std::optional<CorrelationPeak> accept_peak(CorrelationPeak peak, const TemplateParams& params) {
  const int cap = params.window / 4;
  if (peak.peak_value < params.accept_threshold) return std::nullopt;
  if (std::abs(peak.dx) > cap || std::abs(peak.dy) > cap) return std::nullopt;
  return peak;
}

std::vector<Match> rematch(std::span<const Point2> ref_points, const OrientationAmplitude& ref_ao,
                           const OrientationAmplitude& resampled_ao, const MaskGrid& resampled_valid,
                           const SimilarityTransform& m, const TemplateParams& params, int sen_rows, int sen_cols) {
  if (ref_ao.size() != resampled_ao.size()) throw InvalidArgument("template layer counts differ");
  if (ref_ao.empty()) return {};
  const SimilarityTransform to_sensed = m.inverse();
  const int w = params.window;
  const int rows = ref_ao.front().rows();
  const int cols = ref_ao.front().cols();

  std::vector<Match> out;
  for (const Point2& p : ref_points) {
    const int cx = static_cast<int>(std::lround(p.x));
    const int cy = static_cast<int>(std::lround(p.y));
    const int x0 = cx - w / 2;
    const int y0 = cy - w / 2;
    if (x0 < 0 || y0 < 0 || x0 + w > cols || y0 + w > rows) continue;

    int valid = 0;
    for (int r = 0; r < w; ++r) {
      for (int c = 0; c < w; ++c) valid += resampled_valid(y0 + r, x0 + c) != 0;
    }
    if (valid < params.min_valid_fraction * w * w) continue;

    TemplateFeature t_ref, t_sen;
    try {
      t_ref = build_template(ref_ao, {static_cast<double>(cx), static_cast<double>(cy)}, w);
      t_sen = build_template(resampled_ao, {static_cast<double>(cx), static_cast<double>(cy)}, w);
    } catch (const InvalidArgument&) {
      continue;  // flat patch
    }
    if (params.apodize) {
      try {
        apodize_template(t_ref);
        apodize_template(t_sen);
      } catch (const InvalidArgument&) {
        continue;
      }
    }
    const auto peak = accept_peak(phase_correlate(t_ref, t_sen), params);
    if (!peak) continue;

    const Point2 in_resampled{static_cast<double>(cx + peak->dx), static_cast<double>(cy + peak->dy)};
    const Point2 sensed = to_sensed.apply(in_resampled);
    if (sensed.x < 0.0 || sensed.y < 0.0 || sensed.x > sen_cols - 1 || sensed.y > sen_rows - 1) continue;

    Match match;
    match.ref = {static_cast<double>(cx), static_cast<double>(cy)};
    match.sen = sensed;
    match.distance = std::max(0.0, 1.0 - peak->peak_value);
    match.stage = MatchStage::Template;
    out.push_back(match);
  }
  return out;
}

}  // namespace nisr
