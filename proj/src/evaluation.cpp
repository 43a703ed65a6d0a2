#include "nisr/evaluation.hpp"

#include <cmath>
#include <limits>

#include "nisr/synthetic.hpp"
#include "nisr/template_matching.hpp"

namespace nisr {

double compute_rmse(const SimilarityTransform& m, const CheckpointSet& cps) {
  if (cps.pairs.empty()) throw InvalidArgument("checkpoint set is empty");
  if (!m.valid()) throw InvalidArgument("invalid transform");
  const SimilarityTransform to_sensed = m.inverse();
  double sum = 0.0;
  for (const Checkpoint& cp : cps.pairs) {
    const Point2 p = to_sensed.apply(cp.ref);
    const double dx = p.x - cp.sen.x;
    const double dy = p.y - cp.sen.y;
    sum += dx * dx + dy * dy;
  }
  return std::sqrt(sum / static_cast<double>(cps.pairs.size()));
}

EvalReport make_report(const PipelineResult* result, const CheckpointSet& cps, double threshold) {
  EvalReport report;
  report.threshold = threshold;
  if (result == nullptr || !result->transform.valid()) {
    report.rmse = std::numeric_limits<double>::infinity();
    return report;
  }
  report.estimated = true;
  report.nm = static_cast<int>(result->matches.size());
  report.rmse = compute_rmse(result->transform, cps);
  report.success = report.rmse <= threshold;
  return report;
}

double success_rate(std::span<const EvalReport> reports) {
  if (reports.empty()) throw InvalidArgument("no reports");
  int ok = 0;
  for (const EvalReport& r : reports) ok += r.success ? 1 : 0;
  return 100.0 * ok / static_cast<double>(reports.size());
}

Registration register_and_fuse(const GrayImage& ref, const GrayImage& sen, const SimilarityTransform& m) {
  if (!m.valid()) throw InvalidArgument("degenerate transform");
  WarpResult warped = resample_sensed(sen, m, ref.rows(), ref.cols());
  RealGrid fusion(ref.rows(), ref.cols());
  for (int r = 0; r < ref.rows(); ++r) {
    const int tr = r * kFusionTiles / ref.rows();
    for (int c = 0; c < ref.cols(); ++c) {
      const int tc = c * kFusionTiles / ref.cols();
      fusion(r, c) = (tr + tc) % 2 == 0 ? ref(r, c) : warped.image(r, c);
    }
  }
  return {std::move(warped.image), std::move(warped.valid), GrayImage(std::move(fusion))};
}

std::vector<double> sweep_values(SweepKind kind, int steps) {
  std::vector<double> out;
  if (kind == SweepKind::Rotation) {
    if (steps < 1) throw InvalidArgument("rotation sweep needs at least one step");
    for (int i = 0; i < steps; ++i) out.push_back(360.0 * i / steps);
  } else {
    if (steps < 2) throw InvalidArgument("scale sweep needs at least two steps");
    for (int i = 0; i < steps; ++i) out.push_back(1.0 + 3.0 * i / (steps - 1));
  }
  return out;
}

std::vector<SweepStep> sweep_harness(const GrayImage& ref, SweepKind kind, int steps, const PipelineConfig& cfg,
                                     double threshold) {
  const ImageAnalysis ref_analysis = analyze_image(ref, cfg);
  std::vector<SweepStep> out;
  for (double value : sweep_values(kind, steps)) {
    const PlantedPair pair =
        kind == SweepKind::Rotation ? plant_similarity(ref, 1.0, value) : plant_similarity(ref, value, 0.0);
    SweepStep step;
    step.value = value;
    try {
      const PipelineResult result = match_pipeline(ref_analysis, pair.sensed, cfg);
      step.report = make_report(&result, pair.checkpoints, threshold);
      step.stats = result.stats;
    } catch (const MatchingFailure&) {
      step.report = make_report(nullptr, pair.checkpoints, threshold);
    }
    out.push_back(step);
  }
  return out;
}

}  // namespace nisr
