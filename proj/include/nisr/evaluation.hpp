#pragma once

#include <span>
#include <vector>

#include "nisr/image.hpp"
#include "nisr/matching.hpp"
#include "nisr/pipeline.hpp"

namespace nisr {

struct Checkpoint {
  Point2 ref;
  Point2 sen;
};

struct CheckpointSet {
  std::vector<Checkpoint> pairs;
};

struct EvalReport {
  int nm = 0;
  double rmse = 0.0;
  bool success = false;
  double threshold = 5.0;
  bool estimated = false;  // transform estimation succeeded
};

/// Projects each reference checkpoint into the sensed frame through M^-1 and
/// returns the root-mean-square distance to the true sensed checkpoints,
/// averaged over checkpoints.
double compute_rmse(const SimilarityTransform& m, const CheckpointSet& cps);

/// Report for a pipeline run (or a failed one, when `result` is null).
EvalReport make_report(const PipelineResult* result, const CheckpointSet& cps, double threshold = 5.0);

/// 100 * successes / total.
double success_rate(std::span<const EvalReport> reports);

struct Registration {
  GrayImage registered;
  MaskGrid valid;
  GrayImage fusion;
};

inline constexpr int kFusionTiles = 8;

/// Warps the sensed image into the reference frame with bilinear
/// interpolation and renders an 8x8 checkerboard of reference and registered
/// tiles. Tiles with even (row + col) parity show the reference.
Registration register_and_fuse(const GrayImage& ref, const GrayImage& sen, const SimilarityTransform& m);

enum class SweepKind { Rotation, Scale };

struct SweepStep {
  double value = 0.0;  // degrees or scale ratio
  EvalReport report;
  StageStats stats;
};

/// Sweep values: i * 360 / steps degrees for rotation, 1 + 3i / (steps - 1)
/// for scale.
std::vector<double> sweep_values(SweepKind kind, int steps);

/// Synthesizes planted variants of `ref`, matches each against `ref`, and
/// scores them against ground-truth checkpoints.
std::vector<SweepStep> sweep_harness(const GrayImage& ref, SweepKind kind, int steps, const PipelineConfig& cfg,
                                     double threshold = 5.0);

}  // namespace nisr
