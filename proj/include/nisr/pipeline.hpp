#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nisr/description.hpp"
#include "nisr/detection.hpp"
#include "nisr/image.hpp"
#include "nisr/matching.hpp"
#include "nisr/phase_congruency.hpp"
#include "nisr/template_matching.hpp"

namespace nisr {

struct PipelineConfig {
  int n_octaves = 4;
  int n_scales = 4;
  int n_orients = 12;
  int window = 72;
  int subregions = 6;
  int max_features = 5000;
  double tau = 0.75;
  bool moment_weight_additive = false;  // W = tau*Mmax + (1 - tau)*Mmin when set
  double pyramid_sigma = 1.0;
  double min_wavelength = 3.0;
  double scale_step = 2.1;
  double sigma_r = 0.55;
  double noise_k = 2.0;
  double fast_threshold = 0.05;
  double secondary_ratio = 0.8;
  bool use_template = true;
  bool str1 = true;  // secondary orientation
  bool str2 = true;  // double index map
  bool mutual_nn = true;
  double fsc_tolerance = 3.0;
  int fsc_iters = 2000;
  std::uint64_t seed = 42;
  int template_window = 64;
  double template_threshold = 0.1;
  /// Reuse the feature-stage reference amplitudes, pooled pairwise, instead
  /// of filtering the reference again with the template bank.
  bool template_pool_reference = false;

  /// Throws InvalidArgument on an inconsistent configuration.
  void validate() const;

  /// Applies `key=value` pairs; unknown keys are rejected.
  void apply(const std::map<std::string, std::string>& values);
  std::map<std::string, std::string> to_map() const;
};

/// Parses a flat `key=value` file (blank lines and `#` comments allowed).
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Gaussian sigma that brings a reference image down to the resolution of a
/// sensed image `scale` times coarser once it is resampled bilinearly into the
/// reference frame. Zero for scale <= 1.
double resolution_match_sigma(double scale);

/// Filter, phase congruency and moment settings for one pyramid layer.
LayerAnalysisParams layer_params(const PipelineConfig& cfg);

/// Per-image state shared by both matching stages.
struct ImageAnalysis {
  int rows = 0;
  int cols = 0;
  int octaves_used = 0;
  std::vector<FeaturePoint> features;
  std::vector<Descriptor> descriptors;
  GrayImage image;
  /// Full-resolution accumulated amplitude (n_orients layers); kept only
  /// when the template stage pools the reference.
  OrientationAmplitude base_amplitude;
};

ImageAnalysis analyze_image(const GrayImage& image, const PipelineConfig& cfg);

struct StageStats {
  int ref_features = 0;
  int sen_features = 0;
  int ref_descriptors = 0;
  int sen_descriptors = 0;
  int putative_matches = 0;
  int feature_inliers = 0;
  int template_candidates = 0;
  int template_accepted = 0;
  int template_inliers = 0;
  int final_matches = 0;
  bool feature_stage_ok = false;
  bool template_gain = false;
};

struct PipelineResult {
  std::vector<Match> matches;
  SimilarityTransform transform;
  StageStats stats;
};

/// Feature matching, consensus, then optional template rematching. Throws
/// MatchingFailure when the feature stage finds fewer than 4 inliers.
PipelineResult match_pipeline(const GrayImage& ref, const GrayImage& sen, const PipelineConfig& cfg);

/// Same, reusing a precomputed reference analysis built with the same config.
PipelineResult match_pipeline(const ImageAnalysis& ref_analysis, const GrayImage& sen, const PipelineConfig& cfg);

}  // namespace nisr
