// Acceptance suite: one PASS/FAIL line per criterion on stdout.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nisr/description.hpp"
#include "nisr/evaluation.hpp"
#include "nisr/matching.hpp"
#include "nisr/phase_congruency.hpp"
#include "nisr/pipeline.hpp"
#include "nisr/synthetic.hpp"
#include "nisr/template_matching.hpp"

using namespace nisr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const GrayImage& source() {
  static const GrayImage img = textured_scene(512, 512, 7);
  return img;
}

struct Run {
  bool ok = false;
  EvalReport report;
  StageStats stats;
  SimilarityTransform transform;
};

Run run_pair(const ImageAnalysis& ref, const PlantedPair& pair, const PipelineConfig& cfg) {
  Run run;
  try {
    const PipelineResult r = match_pipeline(ref, pair.sensed, cfg);
    run.ok = true;
    run.report = make_report(&r, pair.checkpoints);
    run.stats = r.stats;
    run.transform = r.transform;
  } catch (const MatchingFailure&) {
    run.report = make_report(nullptr, pair.checkpoints);
  }
  return run;
}

bool within(const Run& r, double rmse_cap) { return r.report.success && r.report.rmse <= rmse_cap; }

Outcome self_match() {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineResult r = match_pipeline(source(), source(), PipelineConfig{});
  const double secs = seconds_since(t0);
  const CheckpointSet cps =
      grid_checkpoints(SimilarityTransform::identity(), 512, 512, MaskGrid(512, 512, 1));
  const EvalReport rep = make_report(&r, cps);
  return {rep.success && rep.nm >= 500 && rep.rmse < 0.5 && secs <= 60.0,
          fmt("NM=%d RMSE=%.3f px time=%.1f s", rep.nm, rep.rmse, secs)};
}

Outcome rotation_sweep(const ImageAnalysis& ref) {
  const PipelineConfig cfg;
  int successes = 0, steps = 0;
  double worst = 0.0;
  double nm_on = 0.0, nm_off = 0.0, feat_on = 0.0, feat_off = 0.0;
  for (int i = 0; i < 48; ++i) {
    const double angle = 7.5 * i;
    const Run run = run_pair(ref, plant_similarity(source(), 1.0, angle), cfg);
    if (i % 2 == 0) {
      ++steps;
      successes += within(run, 2.0);
      worst = std::max(worst, run.report.rmse);
      nm_on += run.report.nm;
      feat_on += run.stats.feature_inliers;
    } else {
      nm_off += run.report.nm;
      feat_off += run.stats.feature_inliers;
    }
    std::fprintf(stderr, "  rotation %6.1f: NM=%d feature=%d RMSE=%.3f\n", angle, run.report.nm,
                 run.stats.feature_inliers, run.report.rmse);
  }
  nm_on /= 24.0;
  nm_off /= 24.0;
  feat_on /= 24.0;
  feat_off /= 24.0;
  const double sr = 100.0 * successes / steps;
  return {sr == 100.0 && worst <= 2.0 && nm_on >= nm_off,
          fmt("SR=%.1f%% worst RMSE=%.3f px; mean NM at 15deg multiples %.1f vs 7.5deg offsets %.1f "
              "(feature stage %.1f vs %.1f)",
              sr, worst, nm_on, nm_off, feat_on, feat_off)};
}

Outcome scale_sweep(const ImageAnalysis& ref) {
  const PipelineConfig cfg;
  int successes = 0;
  double worst = 0.0;
  int nm_at_4 = 0;
  const auto values = sweep_values(SweepKind::Scale, 7);
  for (double s : values) {
    const Run run = run_pair(ref, plant_similarity(source(), s, 0.0), cfg);
    successes += within(run, 2.0);
    worst = std::max(worst, run.report.rmse);
    if (s == values.back()) nm_at_4 = run.report.nm;
    std::fprintf(stderr, "  scale %.2f: NM=%d feature=%d RMSE=%.3f\n", s, run.report.nm, run.stats.feature_inliers,
                 run.report.rmse);
  }
  const double sr = 100.0 * successes / values.size();
  return {sr == 100.0 && worst <= 2.0 && nm_at_4 >= 50,
          fmt("SR=%.1f%% worst RMSE=%.3f px NM(4:1)=%d", sr, worst, nm_at_4)};
}

struct NidCase {
  std::string name;
  PlantedPair pair;
};

std::vector<NidCase> nid_suite() {
  std::vector<NidCase> cases;
  for (IntensityRemap remap :
       {IntensityRemap::Gamma04, IntensityRemap::Gamma25, IntensityRemap::Invert, IntensityRemap::LocalContrast}) {
    const std::string name(to_string(remap));
    cases.push_back({name + "/rot30", remap_sensed(plant_similarity(source(), 1.0, 30.0), remap)});
    cases.push_back({name + "/scale1.5", remap_sensed(plant_similarity(source(), 1.5, 0.0), remap)});
  }
  return cases;
}

struct NidRuns {
  std::vector<Run> full, no_str2, feature_only;
};

NidRuns run_nid(const std::vector<NidCase>& cases) {
  PipelineConfig full;
  PipelineConfig no_str2;
  no_str2.str2 = false;
  PipelineConfig feature_only;
  feature_only.use_template = false;
  const ImageAnalysis ref_full = analyze_image(source(), full);
  const ImageAnalysis ref_no_str2 = analyze_image(source(), no_str2);
  const ImageAnalysis ref_feature = analyze_image(source(), feature_only);

  NidRuns runs;
  for (const NidCase& c : cases) {
    runs.full.push_back(run_pair(ref_full, c.pair, full));
    runs.no_str2.push_back(run_pair(ref_no_str2, c.pair, no_str2));
    runs.feature_only.push_back(run_pair(ref_feature, c.pair, feature_only));
    std::fprintf(stderr, "  %-22s full NM=%d RMSE=%.3f | no-str2 NM=%d RMSE=%.3f | feature-only NM=%d\n",
                 c.name.c_str(), runs.full.back().report.nm, runs.full.back().report.rmse,
                 runs.no_str2.back().report.nm, runs.no_str2.back().report.rmse,
                 runs.feature_only.back().report.nm);
  }
  return runs;
}

double rate(const std::vector<Run>& runs) {
  std::vector<EvalReport> reps;
  for (const Run& r : runs) reps.push_back(r.report);
  return success_rate(reps);
}

Outcome nid(const NidRuns& runs) {
  int ok = 0;
  double worst = 0.0;
  for (const Run& r : runs.full) {
    ok += within(r, 2.0);
    worst = std::max(worst, r.report.rmse);
  }
  const double sr = 100.0 * ok / runs.full.size();
  return {sr == 100.0 && worst <= 2.0, fmt("SR=%.1f%% worst RMSE=%.3f px over %zu cases", sr, worst, runs.full.size())};
}

Outcome ablation(const NidRuns& runs) {
  const double with = rate(runs.full);
  const double without = rate(runs.no_str2);
  int monotone = 0;
  for (std::size_t i = 0; i < runs.full.size(); ++i) {
    monotone += runs.full[i].report.nm >= runs.feature_only[i].report.nm;
  }
  return {with >= without && monotone == static_cast<int>(runs.full.size()),
          fmt("SR with double map %.1f%% vs without %.1f%%; NM(full) >= NM(feature only) in %d/%zu cases", with,
              without, monotone, runs.full.size())};
}

TemplateFeature circular_shift(const TemplateFeature& t, int dx, int dy) {
  TemplateFeature out = t;
  const int w = t.window;
  for (int d = 0; d < t.layers; ++d) {
    for (int r = 0; r < w; ++r) {
      for (int c = 0; c < w; ++c) {
        out.values[(static_cast<std::size_t>(d) * w + (r + dy + w) % w) * w + (c + dx + w) % w] = t.at(d, r, c);
      }
    }
  }
  return out;
}

std::pair<int, int> ncc_argmax(const TemplateFeature& a, const TemplateFeature& b, int radius) {
  const int w = a.window;
  double best = -std::numeric_limits<double>::infinity();
  std::pair<int, int> arg{0, 0};
  for (int sy = -radius; sy <= radius; ++sy) {
    for (int sx = -radius; sx <= radius; ++sx) {
      const int r0 = std::max(0, -sy), r1 = std::min(w, w - sy);
      const int c0 = std::max(0, -sx), c1 = std::min(w, w - sx);
      double ma = 0, mb = 0;
      int n = 0;
      for (int d = 0; d < a.layers; ++d) {
        for (int r = r0; r < r1; ++r) {
          for (int c = c0; c < c1; ++c) {
            ma += a.at(d, r, c);
            mb += b.at(d, r + sy, c + sx);
            ++n;
          }
        }
      }
      ma /= n;
      mb /= n;
      double ab = 0, aa = 0, bb = 0;
      for (int d = 0; d < a.layers; ++d) {
        for (int r = r0; r < r1; ++r) {
          for (int c = c0; c < c1; ++c) {
            const double x = a.at(d, r, c) - ma;
            const double y = b.at(d, r + sy, c + sx) - mb;
            ab += x * y;
            aa += x * x;
            bb += y * y;
          }
        }
      }
      const double v = ab / std::sqrt(aa * bb);
      if (v > best) {
        best = v;
        arg = {sx, sy};
      }
    }
  }
  return arg;
}

Outcome phase_correlation_oracle() {
  LogGaborParams lp;
  lp.n_orients = 6;
  const OrientationAmplitude ao = orientation_amplitude(textured_scene(320, 320, 81), lp);
  std::mt19937_64 rng(82);
  std::uniform_int_distribution<int> shift(-8, 8);
  std::uniform_int_distribution<int> pos(48, 272);
  int circular_ok = 0, ncc_ok = 0;
  const int trials = 50;
  for (int i = 0; i < trials; ++i) {
    const Point2 c{double(pos(rng)), double(pos(rng))};
    const int dx = shift(rng), dy = shift(rng);
    const TemplateFeature t = build_template(ao, c, 64);
    const CorrelationPeak circ = phase_correlate(t, circular_shift(t, dx, dy));
    circular_ok += circ.dx == dx && circ.dy == dy;

    const TemplateFeature moved = build_template(ao, {c.x - dx, c.y - dy}, 64);
    TemplateFeature ta = t, tb = moved;
    apodize_template(ta);
    apodize_template(tb);
    const CorrelationPeak p = phase_correlate(ta, tb);
    const auto [nx, ny] = ncc_argmax(t, moved, 10);
    ncc_ok += p.dx == nx && p.dy == ny;
  }
  return {circular_ok == trials && ncc_ok >= 0.8 * trials,
          fmt("circular shifts exact %d/%d; NCC argmax agreement %d/%d", circular_ok, trials, ncc_ok, trials)};
}

Outcome moment_oracle() {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PCMaps maps;
  for (int o = 0; o < 12; ++o) maps.orientations.push_back(o * std::numbers::pi / 12.0);
  double worst = 0.0;
  for (int field = 0; field < 100; ++field) {
    maps.pc.assign(12, RealGrid(32, 32));
    for (auto& g : maps.pc) {
      for (double& v : g.values()) v = u(rng);
    }
    const MomentMaps m = moment_maps(maps);
    for (std::size_t i = 0; i < m.max_moment.size(); ++i) {
      double a = 0, b = 0, c = 0;
      for (int o = 0; o < 12; ++o) {
        const double x = maps.pc[o][i] * std::cos(maps.orientations[o]);
        const double y = maps.pc[o][i] * std::sin(maps.orientations[o]);
        a += x * x;
        b += 2.0 * x * y;
        c += y * y;
      }
      Eigen::Matrix2d cov;
      cov << a, b / 2.0, b / 2.0, c;
      const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cov).eigenvalues();
      worst = std::max({worst, std::abs(m.max_moment[i] - ev(1)), std::abs(m.min_moment[i] - ev(0))});
    }
  }
  return {worst <= 1e-6, fmt("max abs deviation %.3g over 100 fields", worst)};
}

Outcome centroid_oracle() {
  std::mt19937_64 rng(92);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::uniform_int_distribution<int> size(1, 500);
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    std::vector<Point2> pts(size(rng));
    long double sx = 0, sy = 0;
    for (auto& p : pts) {
      p = {u(rng), u(rng)};
      sx += p.x;
      sy += p.y;
    }
    const Point2 g = incremental_centroid(pts);
    worst = std::max({worst, std::abs(g.x - double(sx / pts.size())), std::abs(g.y - double(sy / pts.size()))});
  }
  return {worst <= 1e-9, fmt("max abs deviation %.3g over 1000 sets", worst)};
}

Outcome structural(const ImageAnalysis& ref) {
  std::vector<std::string> failures;

  bool desc_ok = !ref.descriptors.empty();
  for (const Descriptor& d : ref.descriptors) {
    double n2 = 0;
    for (float v : d.values) n2 += double(v) * v;
    desc_ok = desc_ok && d.values.size() == 432 && std::abs(n2 - 1.0) <= 1e-5;
  }
  if (!desc_ok) failures.push_back("descriptor");

  const ScaleSpace s = build_scale_space(source(), 4);
  int a = 512, b = static_cast<int>(std::lround(512 * 2.0 / 3.0));
  bool pyr_ok = s.octave_count() == 4;
  for (int i = 0; i < 4 && pyr_ok; ++i) {
    pyr_ok = s.octaves()[i].rows() == a && s.octaves()[i].cols() == a && s.intra_octaves()[i].rows() == b &&
             s.intra_octaves()[i].cols() == b;
    a = (a + 1) / 2;
    b = (b + 1) / 2;
  }
  if (!pyr_ok) failures.push_back("pyramid");

  std::mt19937_64 rng(93);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool idx_ok = true;
  for (int trial = 0; trial < 20 && idx_ok; ++trial) {
    OrientationAmplitude ao(12, RealGrid(24, 20));
    for (auto& g : ao) {
      for (double& v : g.values()) v = u(rng);
    }
    const IndexMapPair pair = index_maps(ao);
    const IndexGrid full = full_index_map(ao);
    for (std::size_t i = 0; i < full.size() && idx_ok; ++i) {
      int best_odd = 1, best_even = 1, best = 1;
      for (int k = 1; k <= 6; ++k) {
        if (ao[2 * k - 2][i] > ao[2 * best_odd - 2][i]) best_odd = k;
        if (ao[2 * k - 1][i] > ao[2 * best_even - 1][i]) best_even = k;
      }
      for (int k = 1; k <= 12; ++k) {
        if (ao[k - 1][i] > ao[best - 1][i]) best = k;
      }
      idx_ok = pair.odd[i] == best_odd && pair.even[i] == best_even && full[i] == best;
    }
  }
  if (!idx_ok) failures.push_back("index maps");

  std::string detail = fmt("%zu descriptors checked; a sides 512/256/128/64, b sides %d/%d/%d/%d",
                           ref.descriptors.size(), s.intra_octaves()[0].rows(), s.intra_octaves()[1].rows(),
                           s.intra_octaves()[2].rows(), s.intra_octaves()[3].rows());
  for (const auto& f : failures) detail += "; " + f + " mismatch";
  return {failures.empty(), detail};
}

Outcome fsc_robustness() {
  std::mt19937_64 rng(94);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  const SimilarityTransform truth{1.7, 0.9, -40.0, 25.0};
  std::vector<Match> ms;
  std::vector<bool> is_inlier;
  for (int i = 0; i < 200; ++i) {
    Match m;
    m.sen = {u(rng), u(rng)};
    const bool in = i % 2 == 0;
    m.ref = in ? truth.apply(m.sen) : Point2{u(rng), u(rng)};
    m.distance = u(rng) / 500.0;
    ms.push_back(m);
    is_inlier.push_back(in);
  }
  const FscResult a = fsc_filter(ms);
  const FscResult b = fsc_filter(ms);
  double worst = 0.0;
  int recovered = 0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (!is_inlier[i]) continue;
    worst = std::max(worst, reprojection_error(a.transform, ms[i]));
  }
  for (std::size_t i : a.inliers) recovered += is_inlier[i];
  const bool same = a.inliers == b.inliers && a.transform.scale == b.transform.scale &&
                    a.transform.rotation == b.transform.rotation && a.transform.tx == b.transform.tx &&
                    a.transform.ty == b.transform.ty;
  return {worst <= 0.1 && same && recovered == 100,
          fmt("planted inliers recovered %d/100, consensus size %zu, max inlier reprojection %.3g px, %s", recovered,
              a.inliers.size(), worst, same ? "deterministic" : "NOT deterministic")};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };

  report(1, "self-match", self_match());
  const ImageAnalysis ref = analyze_image(source(), PipelineConfig{});
  report(2, "rotation invariance", rotation_sweep(ref));
  report(3, "scale invariance", scale_sweep(ref));
  const NidRuns runs = run_nid(nid_suite());
  report(4, "intensity remap suite", nid(runs));
  report(5, "phase-correlation oracle", phase_correlation_oracle());
  report(6, "moment oracle", moment_oracle());
  report(7, "centroid oracle", centroid_oracle());
  report(8, "structural checks", structural(ref));
  report(9, "ablation direction", ablation(runs));
  report(10, "sample consensus robustness", fsc_robustness());
  return failed == 0 ? 0 : 1;
}
