#pragma once

#include <vector>

#include "nisr/grid.hpp"
#include "nisr/image.hpp"
#include "nisr/log_gabor.hpp"

namespace nisr {

struct PhaseCongruencyParams {
  double noise_k = 2.0;          // T = mean + k * stddev of the noise energy
  double epsilon = 1e-4;         // stabilizer on amplitude sums
  double spread_cutoff = 0.5;    // frequency-spread sigmoid center
  double spread_gain = 10.0;     // frequency-spread sigmoid gain
  double scale_step = 2.1;       // must match the filter bank
};

/// Noise threshold for one orientation from a Rayleigh model of the
/// smallest-scale amplitude: the median fixes the Rayleigh parameter, which is
/// propagated to the sum over all scales.
double estimate_noise_threshold(const RealGrid& smallest_scale_amplitude, int n_scales, double scale_step,
                                double k);
double estimate_noise_threshold(const AmplitudePhaseStack& stack, int o, double k, double scale_step);

/// Phase congruency of one orientation from its per-scale complex outputs.
/// Values are clamped to [0, 1].
RealGrid phase_congruency(const std::vector<ComplexGrid>& per_scale, double noise_threshold,
                          const PhaseCongruencyParams& params);

/// Same, from the amplitude/phase form; estimates T internally.
RealGrid phase_congruency(const AmplitudePhaseStack& stack, int o, const PhaseCongruencyParams& params);

/// Frequency-spread weight: sigmoid of the normalized amplitude spread.
double spread_weight(double amplitude_sum, double amplitude_max, int n_scales, const PhaseCongruencyParams& params);

struct PCMaps {
  std::vector<RealGrid> pc;             // one per orientation
  std::vector<double> orientations;     // radians, matching `pc`
  std::vector<double> noise_threshold;  // one per orientation
};

struct MomentMaps {
  RealGrid max_moment;
  RealGrid min_moment;
};

/// Closed-form eigenvalues of the orientation-accumulated PC moments.
void moment_pair(std::span<const double> pc_values, std::span<const double> orientations, double& max_moment,
                 double& min_moment);

MomentMaps moment_maps(const PCMaps& maps);

enum class MomentWeightSign {
  /// W = tau * Mmax + (tau - 1) * Mmin
  AsPrinted,
  /// W = tau * Mmax + (1 - tau) * Mmin
  Additive,
};

RealGrid weighted_moment(const MomentMaps& moments, double tau,
                         MomentWeightSign sign = MomentWeightSign::AsPrinted);

/// Everything the later stages need from one pyramid layer.
struct LayerAnalysis {
  OrientationAmplitude orientation_amplitude;
  PCMaps pc;
  MomentMaps moments;
  RealGrid weighted;
};

struct LayerAnalysisParams {
  LogGaborParams filters;
  PhaseCongruencyParams pc;
  double tau = 0.75;
  MomentWeightSign sign = MomentWeightSign::AsPrinted;
  bool keep_pc = true;
};

/// Filters a layer orientation by orientation, so the full scale x orientation
/// response never has to be resident at once.
LayerAnalysis analyze_layer(const GrayImage& image, const LayerAnalysisParams& params);

/// Orientation amplitude only (no PC), e.g. for template construction.
OrientationAmplitude orientation_amplitude(const GrayImage& image, const LogGaborParams& params);

}  // namespace nisr
