#include "nisr/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace nisr {

namespace {

bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

GrayImage::GrayImage(int rows, int cols, double fill) : pixels_(rows, cols, fill) {
  if (!in_unit_interval(fill)) throw InvalidArgument("gray level outside [0, 1]");
}

GrayImage::GrayImage(RealGrid pixels) : pixels_(std::move(pixels)) {
  for (double v : pixels_.values()) {
    if (!in_unit_interval(v)) throw InvalidArgument("gray level outside [0, 1] or not finite");
  }
}

GrayImage GrayImage::clamped(RealGrid pixels) {
  for (double& v : pixels.values()) v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
  return GrayImage(std::move(pixels));
}

GrayImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("cannot open image: " + path.string());
  const cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH);
  if (raw.empty()) throw IoError("cannot decode image: " + path.string());
  if (raw.rows == 0 || raw.cols == 0) throw IoError("zero-dimension image: " + path.string());

  double max_level = 0.0;
  switch (raw.depth()) {
    case CV_8U: max_level = 255.0; break;
    case CV_16U: max_level = 65535.0; break;
    default: throw IoError("unsupported bit depth in " + path.string());
  }
  const int channels = raw.channels();
  if (channels != 1 && channels != 3 && channels != 4) {
    throw IoError("unsupported channel count in " + path.string());
  }

  cv::Mat as_double;
  raw.convertTo(as_double, CV_MAKETYPE(CV_64F, channels), 1.0 / max_level);
  RealGrid pixels(raw.rows, raw.cols);
  for (int r = 0; r < raw.rows; ++r) {
    const double* row = as_double.ptr<double>(r);
    for (int c = 0; c < raw.cols; ++c) {
      const double* px = row + static_cast<std::ptrdiff_t>(c) * channels;
      // OpenCV stores color as BGR(A).
      pixels(r, c) = channels == 1 ? px[0] : 0.299 * px[2] + 0.587 * px[1] + 0.114 * px[0];
    }
  }
  return GrayImage::clamped(std::move(pixels));
}

void save_png_levels(const Grid<std::uint8_t>& levels, const std::filesystem::path& path) {
  cv::Mat out(levels.rows(), levels.cols(), CV_8UC1);
  for (int r = 0; r < levels.rows(); ++r) {
    for (int c = 0; c < levels.cols(); ++c) out.at<std::uint8_t>(r, c) = levels(r, c);
  }
  if (!cv::imwrite(path.string(), out)) throw IoError("cannot write image: " + path.string());
}

void save_png(const RealGrid& grid, const std::filesystem::path& path, bool stretch) {
  double lo = 0.0;
  double hi = 1.0;
  if (stretch && !grid.empty()) {
    const auto [mn, mx] = std::minmax_element(grid.values().begin(), grid.values().end());
    lo = *mn;
    hi = *mx > *mn ? *mx : *mn + 1.0;
  }
  Grid<std::uint8_t> levels(grid.rows(), grid.cols());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = std::clamp((grid[i] - lo) / (hi - lo), 0.0, 1.0);
    levels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  save_png_levels(levels, path);
}

void save_png(const GrayImage& image, const std::filesystem::path& path) {
  save_png(image.grid(), path, false);
}

GaussianKernel gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("gaussian sigma must be positive");
  GaussianKernel k;
  k.sigma = sigma;
  k.half_width = static_cast<int>(std::ceil(3.0 * sigma));
  const int m = k.half_width;
  const int side = 2 * m + 1;

  k.weights = RealGrid(side, side);
  const double norm = 1.0 / std::sqrt(2.0 * M_PI * sigma * sigma);
  double total = 0.0;
  for (int i = -m; i <= m; ++i) {
    for (int j = -m; j <= m; ++j) {
      const double w = norm * std::exp(-(i * i + j * j) / (2.0 * sigma * sigma));
      k.weights(i + m, j + m) = w;
      total += w;
    }
  }
  for (double& w : k.weights.values()) w /= total;

  k.axis.resize(side);
  double axis_total = 0.0;
  for (int i = -m; i <= m; ++i) {
    k.axis[i + m] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    axis_total += k.axis[i + m];
  }
  for (double& w : k.axis) w /= axis_total;
  return k;
}

int reflect101(int index, int length) {
  if (length == 1) return 0;
  const int period = 2 * (length - 1);
  index %= period;
  if (index < 0) index += period;
  return index < length ? index : period - index;
}

RealGrid smooth(const RealGrid& input, const GaussianKernel& kernel) {
  const int rows = input.rows();
  const int cols = input.cols();
  const int m = kernel.half_width;
  RealGrid horizontal(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -m; k <= m; ++k) acc += kernel.axis[k + m] * input(r, reflect101(c + k, cols));
      horizontal(r, c) = acc;
    }
  }
  RealGrid out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -m; k <= m; ++k) acc += kernel.axis[k + m] * horizontal(reflect101(r + k, rows), c);
      out(r, c) = acc;
    }
  }
  return out;
}

GrayImage smooth(const GrayImage& input, const GaussianKernel& kernel) {
  return GrayImage::clamped(smooth(input.grid(), kernel));
}

GrayImage decimate2(const GrayImage& input) {
  const int rows = (input.rows() + 1) / 2;
  const int cols = (input.cols() + 1) / 2;
  RealGrid out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out(r, c) = input(2 * r, 2 * c);
  }
  return GrayImage(std::move(out));
}

double sample_bilinear(const RealGrid& grid, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(grid.cols() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(grid.rows() - 1));
  const int x0 = std::min(static_cast<int>(x), grid.cols() - 1);
  const int y0 = std::min(static_cast<int>(y), grid.rows() - 1);
  const int x1 = std::min(x0 + 1, grid.cols() - 1);
  const int y1 = std::min(y0 + 1, grid.rows() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * grid(y0, x0) + fx * grid(y0, x1);
  const double bottom = (1.0 - fx) * grid(y1, x0) + fx * grid(y1, x1);
  return (1.0 - fy) * top + fy * bottom;
}

GrayImage resample(const GrayImage& input, int out_rows, int out_cols, double factor) {
  if (out_rows <= 0 || out_cols <= 0) throw InvalidArgument("resample target must be non-empty");
  RealGrid out(out_rows, out_cols);
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) out(r, c) = sample_bilinear(input.grid(), factor * c, factor * r);
  }
  return GrayImage::clamped(std::move(out));
}

WarpResult warp_bilinear(const GrayImage& input, int out_rows, int out_cols,
                         const std::function<Point2(Point2)>& to_source) {
  RealGrid out(out_rows, out_cols);
  MaskGrid valid(out_rows, out_cols, 0);
  const double max_x = input.cols() - 1;
  const double max_y = input.rows() - 1;
  constexpr double kSlack = 1e-9;
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      const Point2 src = to_source({static_cast<double>(c), static_cast<double>(r)});
      if (src.x < -kSlack || src.y < -kSlack || src.x > max_x + kSlack || src.y > max_y + kSlack) continue;
      out(r, c) = sample_bilinear(input.grid(), src.x, src.y);
      valid(r, c) = 1;
    }
  }
  return {GrayImage::clamped(std::move(out)), std::move(valid)};
}

ScaleSpace::ScaleSpace(std::vector<GrayImage> octaves, std::vector<GrayImage> intra_octaves)
    : octaves_(std::move(octaves)), intra_octaves_(std::move(intra_octaves)) {
  if (octaves_.size() != intra_octaves_.size()) {
    throw InvalidArgument("octave and intra-octave counts differ");
  }
}

const GrayImage& ScaleSpace::layer(int id) const {
  if (id < 0 || id >= layer_count()) throw InvalidArgument("layer id out of range");
  return id % 2 == 0 ? octaves_[id / 2] : intra_octaves_[id / 2];
}

double ScaleSpace::layer_scale(int id) const {
  if (id < 0 || id >= layer_count()) throw InvalidArgument("layer id out of range");
  const double octave = std::ldexp(1.0, id / 2);
  return id % 2 == 0 ? octave : 1.5 * octave;
}

int min_side_for_octaves(int n_octaves) { return (1 << (n_octaves - 1)) * 24; }

int supported_octaves(int rows, int cols, int requested) {
  const int side = std::min(rows, cols);
  int n = 0;
  while (n < requested && side >= min_side_for_octaves(n + 1)) ++n;
  return n;
}

ScaleSpace build_scale_space(const GrayImage& image, int n_octaves, double sigma) {
  if (n_octaves < 1 || n_octaves > 16) throw InvalidArgument("octave count must be in [1, 16]");
  if (std::min(image.rows(), image.cols()) < min_side_for_octaves(n_octaves)) {
    throw InvalidArgument("image too small for the requested octave count");
  }
  const GaussianKernel kernel = gaussian_kernel(sigma);

  std::vector<GrayImage> octaves{image};
  const int b_rows = static_cast<int>(std::lround(image.rows() * 2.0 / 3.0));
  const int b_cols = static_cast<int>(std::lround(image.cols() * 2.0 / 3.0));
  std::vector<GrayImage> intra{resample(image, b_rows, b_cols, 1.5)};
  for (int i = 1; i < n_octaves; ++i) {
    octaves.push_back(decimate2(smooth(octaves.back(), kernel)));
    intra.push_back(decimate2(smooth(intra.back(), kernel)));
  }
  return ScaleSpace(std::move(octaves), std::move(intra));
}

}  // namespace nisr
