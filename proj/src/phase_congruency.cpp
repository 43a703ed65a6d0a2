#include "nisr/phase_congruency.hpp"

#include <algorithm>
#include <cmath>

namespace nisr {

double estimate_noise_threshold(const RealGrid& smallest_scale_amplitude, int n_scales, double scale_step,
                                double k) {
  if (smallest_scale_amplitude.empty()) return 0.0;
  std::vector<double> values(smallest_scale_amplitude.values().begin(), smallest_scale_amplitude.values().end());
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double median = *mid;
  // Rayleigh: median = sigma * sqrt(ln 4).
  const double rayleigh = median / std::sqrt(std::log(4.0));
  // Filter amplitudes fall off by 1/scale_step per scale for white noise.
  const double inv_step = 1.0 / scale_step;
  const double total = rayleigh * (1.0 - std::pow(inv_step, n_scales)) / (1.0 - inv_step);
  const double mean = total * std::sqrt(M_PI / 2.0);
  const double stddev = total * std::sqrt((4.0 - M_PI) / 2.0);
  return std::max(0.0, mean + k * stddev);
}

double estimate_noise_threshold(const AmplitudePhaseStack& stack, int o, double k, double scale_step) {
  return estimate_noise_threshold(stack.amp(0, o), stack.n_scales, scale_step, k);
}

double spread_weight(double amplitude_sum, double amplitude_max, int n_scales, const PhaseCongruencyParams& params) {
  const double spread = (amplitude_sum / (amplitude_max + params.epsilon)) / n_scales;
  return 1.0 / (1.0 + std::exp(params.spread_gain * (params.spread_cutoff - spread)));
}

RealGrid phase_congruency(const std::vector<ComplexGrid>& per_scale, double noise_threshold,
                          const PhaseCongruencyParams& params) {
  if (per_scale.empty()) throw InvalidArgument("phase congruency needs at least one scale");
  const int n_scales = static_cast<int>(per_scale.size());
  RealGrid pc(per_scale[0].rows(), per_scale[0].cols());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    double sum_even = 0.0;
    double sum_odd = 0.0;
    double sum_amp = 0.0;
    double max_amp = 0.0;
    for (const ComplexGrid& g : per_scale) {
      const std::complex<double> z = g[i];
      sum_even += z.real();
      sum_odd += z.imag();
      const double a = std::abs(z);
      sum_amp += a;
      max_amp = std::max(max_amp, a);
    }
    // Mean phase as the direction of the amplitude-weighted phasor sum.
    const double norm = std::hypot(sum_even, sum_odd);
    if (norm == 0.0) continue;
    const double mean_cos = sum_even / norm;
    const double mean_sin = sum_odd / norm;
    // A * (cos(dphi) - |sin(dphi)|) without evaluating any trig function.
    double energy = 0.0;
    for (const ComplexGrid& g : per_scale) {
      const double e = g[i].real();
      const double od = g[i].imag();
      energy += e * mean_cos + od * mean_sin - std::abs(od * mean_cos - e * mean_sin);
    }
    const double w = spread_weight(sum_amp, max_amp, n_scales, params);
    const double value = w * std::max(energy - noise_threshold, 0.0) / (sum_amp + params.epsilon);
    pc[i] = std::clamp(value, 0.0, 1.0);
  }
  return pc;
}

RealGrid phase_congruency(const AmplitudePhaseStack& stack, int o, const PhaseCongruencyParams& params) {
  if (stack.n_scales < 1 || o < 0 || o >= stack.n_orients) throw InvalidArgument("no such orientation in stack");
  std::vector<ComplexGrid> per_scale;
  for (int s = 0; s < stack.n_scales; ++s) {
    const RealGrid& a = stack.amp(s, o);
    const RealGrid& p = stack.phi(s, o);
    ComplexGrid g(a.rows(), a.cols());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::polar(a[i], p[i]);
    per_scale.push_back(std::move(g));
  }
  const double t = estimate_noise_threshold(stack, o, params.noise_k, params.scale_step);
  return phase_congruency(per_scale, t, params);
}

void moment_pair(std::span<const double> pc_values, std::span<const double> orientations, double& max_moment,
                 double& min_moment) {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  for (std::size_t o = 0; o < pc_values.size(); ++o) {
    const double px = pc_values[o] * std::cos(orientations[o]);
    const double py = pc_values[o] * std::sin(orientations[o]);
    a += px * px;
    b += 2.0 * px * py;
    c += py * py;
  }
  const double root = std::sqrt((a - c) * (a - c) + b * b);
  max_moment = 0.5 * (a + c + root);
  min_moment = std::max(0.0, 0.5 * (a + c - root));
}

MomentMaps moment_maps(const PCMaps& maps) {
  if (maps.pc.empty() || maps.pc.size() != maps.orientations.size()) {
    throw InvalidArgument("PC maps and orientations disagree");
  }
  const int rows = maps.pc.front().rows();
  const int cols = maps.pc.front().cols();
  MomentMaps out{RealGrid(rows, cols), RealGrid(rows, cols)};
  std::vector<double> values(maps.pc.size());
  for (std::size_t i = 0; i < out.max_moment.size(); ++i) {
    for (std::size_t o = 0; o < maps.pc.size(); ++o) values[o] = maps.pc[o][i];
    moment_pair(values, maps.orientations, out.max_moment[i], out.min_moment[i]);
  }
  return out;
}

RealGrid weighted_moment(const MomentMaps& moments, double tau, MomentWeightSign sign) {
  if (!(tau >= 0.5 && tau <= 1.0)) throw InvalidArgument("tau must lie in [0.5, 1]");
  const double min_coeff = sign == MomentWeightSign::AsPrinted ? tau - 1.0 : 1.0 - tau;
  RealGrid w(moments.max_moment.rows(), moments.max_moment.cols());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::max(0.0, tau * moments.max_moment[i] + min_coeff * moments.min_moment[i]);
  }
  return w;
}

LayerAnalysis analyze_layer(const GrayImage& image, const LayerAnalysisParams& params) {
  const LogGaborBank bank(image.rows(), image.cols(), params.filters);
  const ImageSpectrum spectrum = image_spectrum(image);
  PhaseCongruencyParams pc_params = params.pc;
  pc_params.scale_step = params.filters.scale_step;

  LayerAnalysis out;
  for (int o = 0; o < bank.n_orients(); ++o) {
    const std::vector<ComplexGrid> per_scale = convolve_orientation(spectrum, bank, o);
    out.orientation_amplitude.push_back(accumulate_scales(per_scale));

    RealGrid smallest(image.rows(), image.cols());
    for (std::size_t i = 0; i < smallest.size(); ++i) smallest[i] = std::abs(per_scale[0][i]);
    const double t = estimate_noise_threshold(smallest, bank.n_scales(), pc_params.scale_step, pc_params.noise_k);
    out.pc.pc.push_back(phase_congruency(per_scale, t, pc_params));
    out.pc.orientations.push_back(bank.orientation(o));
    out.pc.noise_threshold.push_back(t);
  }
  out.moments = moment_maps(out.pc);
  out.weighted = weighted_moment(out.moments, params.tau, params.sign);
  if (!params.keep_pc) out.pc.pc.clear();
  return out;
}

OrientationAmplitude orientation_amplitude(const GrayImage& image, const LogGaborParams& params) {
  const LogGaborBank bank(image.rows(), image.cols(), params);
  const ImageSpectrum spectrum = image_spectrum(image);
  OrientationAmplitude out;
  for (int o = 0; o < bank.n_orients(); ++o) out.push_back(accumulate_scales(convolve_orientation(spectrum, bank, o)));
  return out;
}

}  // namespace nisr
