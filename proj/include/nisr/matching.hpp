#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "nisr/description.hpp"
#include "nisr/grid.hpp"

namespace nisr {

/// p_ref = scale * R(rotation) * p_sen + (tx, ty)
struct SimilarityTransform {
  double scale = 1.0;
  double rotation = 0.0;  // radians
  double tx = 0.0;
  double ty = 0.0;

  Point2 apply(const Point2& p) const;
  SimilarityTransform inverse() const;
  /// (this * other)(p) == this->apply(other.apply(p))
  SimilarityTransform compose(const SimilarityTransform& other) const;
  bool valid() const;

  static SimilarityTransform identity() { return {}; }
};

enum class MatchStage { Feature, Template };

std::string_view to_string(MatchStage stage);
MatchStage match_stage_from_string(std::string_view name);

struct Match {
  Point2 ref;
  Point2 sen;
  double distance = 0.0;
  MatchStage stage = MatchStage::Feature;
  int ref_feature = -1;
  int sen_feature = -1;
};

struct NnMatchParams {
  bool mutual = true;
};

/// Euclidean nearest reference descriptor for every sensed descriptor, with
/// optional mutual-nearest filtering. A feature that owns several descriptors
/// (secondary orientation) contributes at most one match on each side; the
/// smallest distance wins. Output is sorted by sensed feature index.
std::vector<Match> nn_match(std::span<const Descriptor> ref, std::span<const Descriptor> sen,
                            const NnMatchParams& params = {});

double descriptor_distance(std::span<const float> a, std::span<const float> b);

/// Closed-form least-squares similarity mapping `sen` onto `ref`.
/// Throws InvalidArgument for fewer than 2 pairs or coincident sensed points.
SimilarityTransform estimate_similarity(std::span<const Point2> sen, std::span<const Point2> ref);
SimilarityTransform estimate_similarity(std::span<const Match> matches);

/// |M(sen) - ref| in reference pixels.
double reprojection_error(const SimilarityTransform& m, const Match& match);

struct FscParams {
  double inlier_tol = 3.0;   // reference pixels
  int max_iters = 2000;
  std::uint64_t seed = 42;
  int min_inliers = 4;
  int refine_rounds = 5;
};

struct FscResult {
  std::vector<std::size_t> inliers;  // ascending indices into the input
  SimilarityTransform transform;
};

/// Two-stage sample consensus. Stage one scores minimal two-point
/// hypotheses, alternating draws from the best-distance quarter of the
/// matches and from all of them. Stage two refits by least squares on the
/// consensus set and re-classifies until the set stops changing.
/// Throws InvalidArgument for fewer than 2 matches and MatchingFailure when
/// no hypothesis reaches `min_inliers`.
FscResult fsc_filter(std::span<const Match> matches, const FscParams& params = {});

}  // namespace nisr
