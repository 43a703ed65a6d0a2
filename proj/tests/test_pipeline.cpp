#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nisr/evaluation.hpp"
#include "nisr/pipeline.hpp"
#include "nisr/serialization.hpp"
#include "nisr/synthetic.hpp"

using namespace nisr;

namespace {

const GrayImage& scene() {
  static const GrayImage img = textured_scene(256, 256, 71);
  return img;
}

CheckpointSet identity_checkpoints(const GrayImage& img) {
  return grid_checkpoints(SimilarityTransform::identity(), img.rows(), img.cols(),
                          MaskGrid(img.rows(), img.cols(), 1));
}

}  // namespace

TEST_CASE("self-match") {
  const PipelineConfig cfg;
  const PipelineResult r = match_pipeline(scene(), scene(), cfg);
  const EvalReport rep = make_report(&r, identity_checkpoints(scene()));
  CHECK(rep.success);
  CHECK(rep.rmse < 0.5);
  CHECK(rep.nm >= 100);
  CHECK(r.stats.feature_stage_ok);
  CHECK(r.stats.final_matches == static_cast<int>(r.matches.size()));
  CHECK(r.stats.final_matches >= r.stats.feature_inliers);
  for (const Match& m : r.matches) {
    CHECK(m.sen.x >= 0.0);
    CHECK(m.sen.y >= 0.0);
    CHECK(m.sen.x <= 255.0);
    CHECK(m.sen.y <= 255.0);
  }
}

TEST_CASE("blank sensed image is a feature-stage failure") {
  CHECK_THROWS_AS(match_pipeline(scene(), GrayImage(256, 256, 0.5), PipelineConfig{}), MatchingFailure);
}

TEST_CASE("rotation with a gamma change") {
  const GrayImage ref = textured_scene(320, 320, 72);
  PlantedPair pair = plant_similarity(ref, 1.0, 30.0);
  pair = PlantedPair{apply_gamma(pair.sensed, 0.5), pair.valid, pair.truth, pair.checkpoints};
  const PipelineResult r = match_pipeline(ref, pair.sensed, PipelineConfig{});
  CHECK(std::abs(r.transform.rotation * 180.0 / std::numbers::pi - 30.0) <= 1.0);
  CHECK(r.transform.scale == doctest::Approx(1.0).epsilon(0.01));
  CHECK(make_report(&r, pair.checkpoints).success);
}

TEST_CASE("runs are deterministic and the template stage only adds matches") {
  const PlantedPair pair = plant_similarity(scene(), 1.3, 50.0);
  const PipelineConfig cfg;
  const ImageAnalysis ref = analyze_image(scene(), cfg);
  const PipelineResult a = match_pipeline(ref, pair.sensed, cfg);
  const PipelineResult b = match_pipeline(ref, pair.sensed, cfg);
  CHECK(match_json(a, cfg) == match_json(b, cfg));
  CHECK(a.stats.final_matches >= a.stats.feature_inliers);

  PipelineConfig feature_only = cfg;
  feature_only.use_template = false;
  const PipelineResult f = match_pipeline(scene(), pair.sensed, feature_only);
  CHECK(f.stats.template_candidates == 0);
  for (const Match& m : f.matches) CHECK(m.stage == MatchStage::Feature);
  CHECK(a.stats.final_matches >= f.stats.final_matches);
}

TEST_CASE("identity step of a scale sweep reproduces the self-match") {
  const PipelineConfig cfg;
  const PipelineResult self = match_pipeline(scene(), scene(), cfg);
  const auto steps = sweep_harness(scene(), SweepKind::Scale, 2, cfg);
  REQUIRE(steps.size() == 2);
  CHECK(steps[0].value == 1.0);
  CHECK(steps[0].report.nm == static_cast<int>(self.matches.size()));
  CHECK(steps[0].report.success);
  CHECK(steps[0].report.rmse < 0.5);
  CHECK(steps[1].value == 4.0);
}

TEST_CASE("configuration reaches the stages") {
  PipelineConfig cfg;
  cfg.str2 = false;
  cfg.str1 = false;
  const ImageAnalysis a = analyze_image(scene(), cfg);
  REQUIRE(!a.descriptors.empty());
  for (const Descriptor& d : a.descriptors) {
    CHECK(d.values.size() == 432);
    CHECK(!d.secondary);
  }
  CHECK(a.octaves_used == 4);
  CHECK(a.base_amplitude.empty());

  cfg.max_features = 50;
  CHECK(analyze_image(scene(), cfg).features.size() <= 50);

  PipelineConfig bad;
  bad.n_orients = 10;  // the template stage needs a multiple of four
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad.use_template = false;
  CHECK_NOTHROW(bad.validate());
  CHECK(resolution_match_sigma(1.0) == 0.0);
  CHECK(resolution_match_sigma(2.0) == doctest::Approx(std::sqrt(3.0 * (0.25 + 1.0 / 6.0))));
}
