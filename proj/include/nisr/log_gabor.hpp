#pragma once

#include <vector>

#include "nisr/grid.hpp"
#include "nisr/image.hpp"

namespace nisr {

struct LogGaborParams {
  int n_scales = 4;
  int n_orients = 12;
  double min_wavelength = 3.0;  // pixels
  double scale_step = 2.1;
  double sigma_r = 0.55;        // radial bandwidth ratio
  double sigma_theta = 0.0;     // radians; <= 0 selects (pi / n_orients) / 1.2

  double angular_sigma() const;
};

/// Radial factor of the log-Gabor transfer function; 0 at r == 0.
double radial_term(double r, double center_frequency, double sigma_r);

/// Angular factor; `delta` is wrapped to [0, pi] before evaluation.
double angular_term(double theta, double theta_center, double sigma_theta);

/// Frequency-domain log-Gabor filter bank for one transform size.
///
/// Filters are stored as separable radial and angular factors laid out in
/// FFT bin order, so `transfer(s, o, i) == radial(s)[i] * angular(o)[i]`.
/// Orientation o (0-based) is centered at o * pi / n_orients, measured
/// counter-clockwise on screen (image y axis points down).
class LogGaborBank {
 public:
  LogGaborBank(int rows, int cols, const LogGaborParams& params);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int n_scales() const { return params_.n_scales; }
  int n_orients() const { return params_.n_orients; }
  const LogGaborParams& params() const { return params_; }

  double center_frequency(int s) const { return center_frequencies_.at(s); }
  double orientation(int o) const { return orientations_.at(o); }

  double transfer(int s, int o, std::size_t bin) const { return radial_[s][bin] * angular_[o][bin]; }
  /// Full transfer function for (s, o) in FFT bin order.
  RealGrid filter(int s, int o) const;

 private:
  int rows_;
  int cols_;
  LogGaborParams params_;
  std::vector<double> center_frequencies_;
  std::vector<double> orientations_;
  std::vector<RealGrid> radial_;
  std::vector<RealGrid> angular_;
};

LogGaborBank build_bank(int rows, int cols, const LogGaborParams& params);

/// Complex filter outputs for every (scale, orientation).
struct FilterResponse {
  int n_scales = 0;
  int n_orients = 0;
  std::vector<ComplexGrid> responses;  // index s * n_orients + o

  const ComplexGrid& at(int s, int o) const { return responses[static_cast<std::size_t>(s) * n_orients + o]; }
};

/// Forward transform of an image, shared across all filters of a bank.
struct ImageSpectrum {
  ComplexGrid bins;
};

ImageSpectrum image_spectrum(const GrayImage& image);

/// Per-scale complex outputs of one orientation.
std::vector<ComplexGrid> convolve_orientation(const ImageSpectrum& spectrum, const LogGaborBank& bank, int o);

FilterResponse convolve(const GrayImage& image, const LogGaborBank& bank);

struct AmplitudePhaseStack {
  int n_scales = 0;
  int n_orients = 0;
  std::vector<RealGrid> amplitude;  // index s * n_orients + o
  std::vector<RealGrid> phase;      // (-pi, pi], 0 where amplitude is 0

  const RealGrid& amp(int s, int o) const { return amplitude[static_cast<std::size_t>(s) * n_orients + o]; }
  const RealGrid& phi(int s, int o) const { return phase[static_cast<std::size_t>(s) * n_orients + o]; }
};

/// Amplitude and phase of one complex filter output.
void amplitude_phase(double real, double imag, double& amplitude, double& phase);

AmplitudePhaseStack amplitude_phase(const FilterResponse& response);

/// A_o: amplitude summed over scales, one grid per orientation.
using OrientationAmplitude = std::vector<RealGrid>;

OrientationAmplitude accumulate_orientation(const AmplitudePhaseStack& stack);

/// Sums of A_so over s computed straight from per-scale complex outputs.
RealGrid accumulate_scales(const std::vector<ComplexGrid>& per_scale);

/// Index maps over odd- and even-numbered orientation layers.
///
/// Layers are numbered 1..o_max. odd(x, y) = k means layer 2k-1 has the
/// largest amplitude among odd layers; even(x, y) = k means layer 2k wins
/// among even layers. Values lie in [1, o_max / 2]; ties go to the lowest k.
struct IndexMapPair {
  IndexGrid odd;
  IndexGrid even;
  int levels = 0;  // o_max / 2
};

IndexMapPair index_maps(const OrientationAmplitude& ao);

/// Single index map over all layers, values in [1, o_max]. Used when the
/// double-map strategy is disabled.
IndexGrid full_index_map(const OrientationAmplitude& ao);

/// Sums adjacent orientation layers (1+2, 3+4, ...) to halve the layer count.
OrientationAmplitude pool_orientation_pairs(const OrientationAmplitude& ao);

}  // namespace nisr
