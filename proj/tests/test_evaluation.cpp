#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "nisr/evaluation.hpp"
#include "nisr/serialization.hpp"
#include "nisr/synthetic.hpp"
#include "support.hpp"

using namespace nisr;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("nisr_eval_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EvalReport report(bool success) {
  EvalReport r;
  r.success = success;
  return r;
}

PipelineResult sample_result() {
  PipelineResult r;
  r.transform = {1.25, 0.5, -3.5, 17.0};
  r.stats.ref_features = 120;
  r.stats.feature_inliers = 40;
  r.stats.final_matches = 2;
  r.stats.feature_stage_ok = true;
  Match a;
  a.ref = {10.5, 20.25};
  a.sen = {1.0 / 3.0, 7.0};
  a.distance = 0.125;
  Match b = a;
  b.ref = {40.0, 41.0};
  b.stage = MatchStage::Template;
  b.distance = 0.7;
  r.matches = {a, b};
  return r;
}

}  // namespace

TEST_CASE("rmse over checkpoints") {
  const SimilarityTransform m{2.0, 0.3, 5.0, -1.0};
  const SimilarityTransform inv = m.inverse();
  CheckpointSet exact;
  for (const Point2 p : {Point2{10, 10}, Point2{50, 80}, Point2{120, 3}}) exact.pairs.push_back({p, inv.apply(p)});
  CHECK(compute_rmse(m, exact) == doctest::Approx(0.0).epsilon(1e-12));

  const SimilarityTransform id = SimilarityTransform::identity();
  CheckpointSet one{{{{10, 10}, {13, 14}}}};
  CHECK(compute_rmse(id, one) == doctest::Approx(5.0));

  CheckpointSet two{{{{0, 0}, {1, 0}}, {{5, 5}, {5, 6}}}};
  CHECK(compute_rmse(id, two) == doctest::Approx(1.0));

  CheckpointSet mixed{{{{0, 0}, {3, 0}}, {{5, 5}, {5, 6}}, {{9, 1}, {9, 1}}}};
  CheckpointSet reversed = mixed;
  std::reverse(reversed.pairs.begin(), reversed.pairs.end());
  CHECK(compute_rmse(id, mixed) == doctest::Approx(compute_rmse(id, reversed)).epsilon(1e-15));
  CHECK(compute_rmse(id, mixed) == doctest::Approx(std::sqrt(10.0 / 3.0)));

  CHECK_THROWS_AS(compute_rmse(id, CheckpointSet{}), InvalidArgument);
  CHECK_THROWS_AS(compute_rmse({0.0, 0.0, 0.0, 0.0}, one), InvalidArgument);
}

TEST_CASE("success rate") {
  const std::vector<EvalReport> three_of_four{report(true), report(true), report(false), report(true)};
  CHECK(success_rate(three_of_four) == doctest::Approx(75.0));
  const std::vector<EvalReport> none{report(false), report(false)};
  CHECK(success_rate(none) == 0.0);
  std::vector<EvalReport> table(164, report(true));
  table[0].success = table[1].success = false;
  CHECK(std::round(success_rate(table) * 10.0) / 10.0 == doctest::Approx(98.8));
  CHECK_THROWS_AS(success_rate(std::vector<EvalReport>{}), InvalidArgument);
}

TEST_CASE("reports") {
  PipelineResult r = sample_result();
  r.transform = SimilarityTransform::identity();
  CheckpointSet cps{{{{0, 0}, {3, 4}}}};
  const EvalReport ok = make_report(&r, cps);
  CHECK(ok.nm == 2);
  CHECK(ok.rmse == doctest::Approx(5.0));
  CHECK(ok.success);
  CHECK(ok.estimated);
  CHECK(!make_report(&r, cps, 4.9).success);
  const EvalReport failed = make_report(nullptr, cps);
  CHECK(!failed.success);
  CHECK(!failed.estimated);
  CHECK(std::isinf(failed.rmse));
  CHECK(failed.nm == 0);
}

TEST_CASE("registration and fusion") {
  const GrayImage img = testing::random_texture(96, 128, 61, 2.0);
  SUBCASE("identity") {
    const Registration reg = register_and_fuse(img, img, SimilarityTransform::identity());
    for (int r = 1; r < 95; ++r) {
      for (int c = 1; c < 127; ++c) CHECK(std::abs(reg.registered(r, c) - img(r, c)) <= 1e-6);
    }
    // Self-registration leaves no seam between tiles.
    for (std::size_t i = 0; i < img.grid().size(); ++i) {
      if (reg.valid[i]) CHECK(reg.fusion.grid()[i] == doctest::Approx(img.grid()[i]).epsilon(1e-12));
    }
  }
  SUBCASE("translation") {
    const Registration reg = register_and_fuse(img, img, {1.0, 0.0, 6.0, -4.0});
    CHECK(reg.registered(30, 40) == doctest::Approx(img(34, 34)));
    CHECK(reg.valid(94, 2) == 0);
  }
  SUBCASE("checkerboard layout") {
    const GrayImage other(RealGrid(96, 128, 0.0));
    const Registration reg = register_and_fuse(GrayImage(RealGrid(96, 128, 1.0)), other, SimilarityTransform::identity());
    CHECK(reg.fusion(0, 0) == 1.0);
    CHECK(reg.fusion(0, 16) == 0.0);
    CHECK(reg.fusion(12, 0) == 0.0);
    CHECK(reg.fusion(12, 16) == 1.0);
    CHECK(reg.fusion(95, 127) == 1.0);
  }
  SUBCASE("planted transform") {
    const GrayImage ref = textured_scene(256, 256, 62);
    const PlantedPair pair = plant_similarity(ref, 1.2, 20.0);
    const Registration reg = register_and_fuse(ref, pair.sensed, pair.truth);
    RealGrid coverage_src(pair.valid.rows(), pair.valid.cols());
    for (std::size_t i = 0; i < coverage_src.size(); ++i) coverage_src[i] = pair.valid[i];
    const Registration coverage = register_and_fuse(ref, GrayImage(coverage_src), pair.truth);
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < ref.grid().size(); ++i) {
      if (!reg.valid[i] || coverage.registered.grid()[i] != 1.0) continue;
      sum += std::abs(reg.registered.grid()[i] - ref.grid()[i]);
      ++n;
    }
    REQUIRE(n > 20000);
    CHECK(sum / n < 0.02);
  }
  CHECK_THROWS_AS(register_and_fuse(img, img, {-1.0, 0.0, 0.0, 0.0}), InvalidArgument);
}

TEST_CASE("match file round trip") {
  const PipelineResult r = sample_result();
  const PipelineConfig cfg;
  const std::string text = match_json(r, cfg);
  CHECK(text == match_json(r, cfg));
  CHECK(text.find("\"rotation_deg\"") != std::string::npos);
  CHECK(text.find("\"stage\": \"template\"") != std::string::npos);

  const auto path = temp_file("matches.json");
  write_match_file(path, r, cfg);
  CHECK(slurp(path) == text);
  const MatchFile back = read_match_file(path);
  CHECK(back.transform.scale == r.transform.scale);
  CHECK(back.transform.rotation == doctest::Approx(r.transform.rotation).epsilon(1e-14));
  CHECK(back.transform.tx == r.transform.tx);
  CHECK(back.stats.feature_inliers == 40);
  CHECK(back.stats.feature_stage_ok);
  REQUIRE(back.matches.size() == 2);
  CHECK(back.matches[0].sen.x == r.matches[0].sen.x);
  CHECK(back.matches[1].stage == MatchStage::Template);
  CHECK(back.config == cfg.to_map());

  CHECK_THROWS_AS(parse_match_json("{not json"), IoError);
  CHECK_THROWS_AS(parse_match_json("{\"matches\": 3}"), IoError);
  CHECK_THROWS_AS(read_match_file(temp_file("missing.json")), IoError);
}

TEST_CASE("checkpoint files") {
  const CheckpointSet cps = parse_checkpoints(R"([{"ref":[1,2],"sen":[3.5,4]},{"ref":[5,6],"sen":[7,8]}])");
  REQUIRE(cps.pairs.size() == 2);
  CHECK(cps.pairs[0].sen.x == 3.5);
  CHECK(cps.pairs[1].ref.y == 6.0);
  const auto path = temp_file("cps.json");
  write_checkpoints(path, cps);
  const CheckpointSet back = read_checkpoints(path);
  CHECK(back.pairs.size() == 2);
  CHECK(back.pairs[0].sen.x == 3.5);
  CHECK_THROWS_AS(parse_checkpoints("[]"), IoError);
  CHECK_THROWS_AS(parse_checkpoints("{}"), IoError);
  CHECK_THROWS_AS(parse_checkpoints(R"([{"ref":[1],"sen":[3,4]}])"), IoError);
}

TEST_CASE("configuration") {
  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.apply({{"n_orients", "8"}, {"use_template", "off"}, {"seed", "7"}, {"tau", "0.5"}});
  CHECK(cfg.n_orients == 8);
  CHECK(!cfg.use_template);
  CHECK(cfg.seed == 7);
  CHECK(cfg.tau == 0.5);
  CHECK_THROWS_AS(cfg.apply({{"no_such_key", "1"}}), InvalidArgument);
  CHECK_THROWS_AS(cfg.apply({{"seed", "-1"}}), InvalidArgument);

  PipelineConfig copy;
  copy.apply(cfg.to_map());
  CHECK(copy.to_map() == cfg.to_map());

  PipelineConfig odd;
  odd.n_orients = 7;
  CHECK_THROWS_AS(odd.validate(), InvalidArgument);
  PipelineConfig uneven;
  uneven.window = 70;
  CHECK_THROWS_AS(uneven.validate(), InvalidArgument);

  const auto path = temp_file("cfg.txt");
  {
    std::ofstream out(path);
    out << "# comment\n\nwindow = 60\nsubregions=5\n";
  }
  const auto values = read_config_file(path);
  CHECK(values.at("window") == "60");
  CHECK(values.at("subregions") == "5");
  {
    std::ofstream out(path);
    out << "window 60\n";
  }
  CHECK_THROWS_AS(read_config_file(path), IoError);
}

TEST_CASE("sweep values and csv") {
  const auto rot = sweep_values(SweepKind::Rotation, 24);
  REQUIRE(rot.size() == 24);
  CHECK(rot[1] == doctest::Approx(15.0));
  CHECK(rot[23] == doctest::Approx(345.0));
  const auto sc = sweep_values(SweepKind::Scale, 7);
  REQUIRE(sc.size() == 7);
  CHECK(sc.front() == 1.0);
  CHECK(sc[1] == doctest::Approx(1.5));
  CHECK(sc.back() == doctest::Approx(4.0));
  CHECK_THROWS_AS(sweep_values(SweepKind::Scale, 1), InvalidArgument);

  std::vector<SweepStep> steps(2);
  steps[0].value = 0.0;
  steps[0].report.nm = 12;
  steps[0].report.rmse = 0.25;
  steps[0].report.success = true;
  steps[1].value = 15.0;
  steps[1].report.rmse = std::numeric_limits<double>::infinity();
  const auto path = temp_file("sweep.csv");
  write_sweep_csv(path, steps);
  CHECK(slurp(path) == "step_value,nm,rmse,success\n0,12,0.25,1\n15,0,nan,0\n");
}
