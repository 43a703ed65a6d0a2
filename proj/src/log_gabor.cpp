#include "nisr/log_gabor.hpp"

#include <cmath>

#include "nisr/fft.hpp"

namespace nisr {

double LogGaborParams::angular_sigma() const {
  return sigma_theta > 0.0 ? sigma_theta : (M_PI / n_orients) / 1.2;
}

double radial_term(double r, double center_frequency, double sigma_r) {
  if (r <= 0.0) return 0.0;
  const double log_ratio = std::log(r / center_frequency);
  const double log_sigma = std::log(sigma_r);
  return std::exp(-(log_ratio * log_ratio) / (2.0 * log_sigma * log_sigma));
}

double angular_term(double theta, double theta_center, double sigma_theta) {
  const double delta = std::abs(std::atan2(std::sin(theta - theta_center), std::cos(theta - theta_center)));
  return std::exp(-(delta * delta) / (2.0 * sigma_theta * sigma_theta));
}

LogGaborBank::LogGaborBank(int rows, int cols, const LogGaborParams& params)
    : rows_(rows), cols_(cols), params_(params) {
  if (rows <= 0 || cols <= 0) throw InvalidArgument("filter bank needs positive dimensions");
  if (params.n_scales < 1) throw InvalidArgument("n_scales must be >= 1");
  if (params.n_orients < 4 || params.n_orients % 2 != 0) {
    throw InvalidArgument("n_orients must be even and >= 4");
  }
  if (!(params.min_wavelength >= 2.0)) throw InvalidArgument("min_wavelength below Nyquist (2 px)");
  if (!(params.scale_step > 1.0)) throw InvalidArgument("scale_step must exceed 1");
  if (!(params.sigma_r > 0.0 && params.sigma_r < 1.0)) throw InvalidArgument("sigma_r must be in (0, 1)");

  for (int s = 0; s < params.n_scales; ++s) {
    center_frequencies_.push_back(1.0 / (params.min_wavelength * std::pow(params.scale_step, s)));
  }
  for (int o = 0; o < params.n_orients; ++o) orientations_.push_back(o * M_PI / params.n_orients);

  RealGrid radius(rows, cols);
  RealGrid theta(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const double v = fft::frequency(r, rows);
    for (int c = 0; c < cols; ++c) {
      const double u = fft::frequency(c, cols);
      radius(r, c) = std::hypot(u, v);
      // Rows grow downward, so flip v to measure angles counter-clockwise on screen.
      theta(r, c) = std::atan2(-v, u);
    }
  }

  const double sigma_theta = params.angular_sigma();
  for (int s = 0; s < params.n_scales; ++s) {
    RealGrid g(rows, cols);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = radial_term(radius[i], center_frequencies_[s], params.sigma_r);
    radial_.push_back(std::move(g));
  }
  for (int o = 0; o < params.n_orients; ++o) {
    RealGrid g(rows, cols);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = angular_term(theta[i], orientations_[o], sigma_theta);
    g[0] = 0.0;
    angular_.push_back(std::move(g));
  }
}

RealGrid LogGaborBank::filter(int s, int o) const {
  RealGrid out(rows_, cols_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = transfer(s, o, i);
  return out;
}

LogGaborBank build_bank(int rows, int cols, const LogGaborParams& params) {
  return LogGaborBank(rows, cols, params);
}

ImageSpectrum image_spectrum(const GrayImage& image) { return {fft::forward_2d(image.grid())}; }

std::vector<ComplexGrid> convolve_orientation(const ImageSpectrum& spectrum, const LogGaborBank& bank, int o) {
  if (spectrum.bins.rows() != bank.rows() || spectrum.bins.cols() != bank.cols()) {
    throw InvalidArgument("image and filter bank dimensions differ");
  }
  const double inv_n = 1.0 / static_cast<double>(spectrum.bins.size());
  std::vector<ComplexGrid> out;
  out.reserve(bank.n_scales());
  for (int s = 0; s < bank.n_scales(); ++s) {
    ComplexGrid g(bank.rows(), bank.cols());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = spectrum.bins[i] * (bank.transfer(s, o, i) * inv_n);
    fft::inverse_2d(g);
    out.push_back(std::move(g));
  }
  return out;
}

FilterResponse convolve(const GrayImage& image, const LogGaborBank& bank) {
  if (image.rows() != bank.rows() || image.cols() != bank.cols()) {
    throw InvalidArgument("image and filter bank dimensions differ");
  }
  const ImageSpectrum spectrum = image_spectrum(image);
  FilterResponse resp;
  resp.n_scales = bank.n_scales();
  resp.n_orients = bank.n_orients();
  resp.responses.resize(static_cast<std::size_t>(resp.n_scales) * resp.n_orients);
  for (int o = 0; o < bank.n_orients(); ++o) {
    auto per_scale = convolve_orientation(spectrum, bank, o);
    for (int s = 0; s < bank.n_scales(); ++s) {
      resp.responses[static_cast<std::size_t>(s) * resp.n_orients + o] = std::move(per_scale[s]);
    }
  }
  return resp;
}

void amplitude_phase(double real, double imag, double& amplitude, double& phase) {
  amplitude = std::hypot(real, imag);
  phase = amplitude == 0.0 ? 0.0 : std::atan2(imag, real);
  // atan2 returns -pi for (negative, -0.0); fold onto the half-open interval.
  if (phase <= -M_PI) phase = M_PI;
}

AmplitudePhaseStack amplitude_phase(const FilterResponse& response) {
  AmplitudePhaseStack stack;
  stack.n_scales = response.n_scales;
  stack.n_orients = response.n_orients;
  for (const ComplexGrid& g : response.responses) {
    RealGrid amp(g.rows(), g.cols());
    RealGrid phi(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) amplitude_phase(g[i].real(), g[i].imag(), amp[i], phi[i]);
    stack.amplitude.push_back(std::move(amp));
    stack.phase.push_back(std::move(phi));
  }
  return stack;
}

OrientationAmplitude accumulate_orientation(const AmplitudePhaseStack& stack) {
  OrientationAmplitude ao;
  for (int o = 0; o < stack.n_orients; ++o) {
    RealGrid sum = stack.amp(0, o);
    for (int s = 1; s < stack.n_scales; ++s) {
      const RealGrid& a = stack.amp(s, o);
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += a[i];
    }
    ao.push_back(std::move(sum));
  }
  return ao;
}

RealGrid accumulate_scales(const std::vector<ComplexGrid>& per_scale) {
  if (per_scale.empty()) throw InvalidArgument("no scales to accumulate");
  RealGrid sum(per_scale[0].rows(), per_scale[0].cols());
  for (const ComplexGrid& g : per_scale) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += std::abs(g[i]);
  }
  return sum;
}

namespace {

void check_layers(const OrientationAmplitude& ao) {
  if (ao.empty()) throw InvalidArgument("no orientation layers");
  for (const RealGrid& g : ao) {
    if (!g.same_shape(ao.front())) throw InvalidArgument("orientation layers differ in shape");
  }
}

// 1-based position of the largest value among layers first, first+step, ...
IndexGrid argmax_layers(const OrientationAmplitude& ao, int first, int step) {
  const int rows = ao.front().rows();
  const int cols = ao.front().cols();
  IndexGrid out(rows, cols, 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int best = 1;
    double best_value = ao[first][i];
    int k = 1;
    for (std::size_t layer = first + step; layer < ao.size(); layer += step) {
      ++k;
      if (ao[layer][i] > best_value) {
        best_value = ao[layer][i];
        best = k;
      }
    }
    out[i] = best;
  }
  return out;
}

}  // namespace

IndexMapPair index_maps(const OrientationAmplitude& ao) {
  check_layers(ao);
  if (ao.size() % 2 != 0) throw InvalidArgument("double index map needs an even layer count");
  return {argmax_layers(ao, 0, 2), argmax_layers(ao, 1, 2), static_cast<int>(ao.size() / 2)};
}

IndexGrid full_index_map(const OrientationAmplitude& ao) {
  check_layers(ao);
  return argmax_layers(ao, 0, 1);
}

OrientationAmplitude pool_orientation_pairs(const OrientationAmplitude& ao) {
  check_layers(ao);
  if (ao.size() % 2 != 0) throw InvalidArgument("pairwise pooling needs an even layer count");
  OrientationAmplitude out;
  for (std::size_t o = 0; o < ao.size(); o += 2) {
    RealGrid sum = ao[o];
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += ao[o + 1][i];
    out.push_back(std::move(sum));
  }
  return out;
}

}  // namespace nisr
