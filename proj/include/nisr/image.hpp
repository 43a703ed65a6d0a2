#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "nisr/grid.hpp"

namespace nisr {

/// Grayscale image with intensities normalized to [0, 1].
///
/// Construction validates that every sample is finite and inside the unit
/// interval; every operation in this module that produces a GrayImage does so
/// through convex combinations, so the invariant survives smoothing and
/// resampling.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int rows, int cols, double fill = 0.0);
  explicit GrayImage(RealGrid pixels);

  int rows() const { return pixels_.rows(); }
  int cols() const { return pixels_.cols(); }
  bool empty() const { return pixels_.empty(); }
  double operator()(int r, int c) const { return pixels_(r, c); }
  const RealGrid& grid() const { return pixels_; }

  /// Clamps into [0, 1] instead of rejecting out-of-range input.
  static GrayImage clamped(RealGrid pixels);

 private:
  RealGrid pixels_;
};

/// Reads an 8/16-bit gray or RGB(A) raster (PNG, TIFF, JPEG).
/// Color is reduced with BT.601 luminance weights; values are divided by the
/// bit-depth maximum.
GrayImage load_image(const std::filesystem::path& path);

/// Writes a grid as an 8-bit PNG. Values are clamped to [0, 1] unless
/// `stretch` is set, in which case the grid is min/max normalized first.
void save_png(const RealGrid& grid, const std::filesystem::path& path, bool stretch = false);
void save_png(const GrayImage& image, const std::filesystem::path& path);

/// Writes raw 8-bit levels (used for index-map dumps).
void save_png_levels(const Grid<std::uint8_t>& levels, const std::filesystem::path& path);

struct GaussianKernel {
  int half_width = 0;
  double sigma = 0.0;
  /// (2m+1) x (2m+1) weights, normalized to sum to 1.
  RealGrid weights;
  /// Normalized 1D factor; weights(i, j) == axis[i] * axis[j].
  std::vector<double> axis;
};

GaussianKernel gaussian_kernel(double sigma);

/// Separable Gaussian convolution with reflect-101 borders.
RealGrid smooth(const RealGrid& input, const GaussianKernel& kernel);
GrayImage smooth(const GrayImage& input, const GaussianKernel& kernel);

/// Mirror index without repeating the edge sample (reflect-101).
int reflect101(int index, int length);

/// Keeps every second sample; odd dimensions round up.
GrayImage decimate2(const GrayImage& input);

/// Bilinear sample with coordinates clamped to the grid.
double sample_bilinear(const RealGrid& grid, double x, double y);

/// out(r, c) = input(factor * r, factor * c), bilinearly interpolated.
GrayImage resample(const GrayImage& input, int out_rows, int out_cols, double factor);

struct WarpResult {
  GrayImage image;
  /// 1 where the source coordinate fell inside the input image.
  MaskGrid valid;
};

/// Pulls every output pixel from `input` at `to_source(output_point)`.
/// Samples outside the source are 0 and flagged invalid.
WarpResult warp_bilinear(const GrayImage& input, int out_rows, int out_cols,
                         const std::function<Point2(Point2)>& to_source);

/// Octave (a_i) and intra-octave (b_i) pyramid.
///
/// Layers are addressed by a flat id: id 2i is a_i and id 2i+1 is b_i.
/// A point p in layer coordinates sits at layer_scale(id) * p in the
/// original image.
class ScaleSpace {
 public:
  ScaleSpace(std::vector<GrayImage> octaves, std::vector<GrayImage> intra_octaves);

  int octave_count() const { return static_cast<int>(octaves_.size()); }
  int layer_count() const { return 2 * octave_count(); }
  const GrayImage& layer(int id) const;
  double layer_scale(int id) const;
  const std::vector<GrayImage>& octaves() const { return octaves_; }
  const std::vector<GrayImage>& intra_octaves() const { return intra_octaves_; }

 private:
  std::vector<GrayImage> octaves_;
  std::vector<GrayImage> intra_octaves_;
};

/// Smallest image side accepted for a pyramid with `n_octaves` octaves.
int min_side_for_octaves(int n_octaves);

/// Largest octave count (capped at `requested`) that an image of the given
/// size supports; 0 when even one octave does not fit.
int supported_octaves(int rows, int cols, int requested);

ScaleSpace build_scale_space(const GrayImage& image, int n_octaves, double sigma = 1.0);

}  // namespace nisr
