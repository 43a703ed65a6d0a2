// Command-line driver: match, register, eval, sweep, debug-maps.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>

#include "CLI11.hpp"
#include "nisr/evaluation.hpp"
#include "nisr/pipeline.hpp"
#include "nisr/serialization.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMatchFailure = 2;
constexpr int kExitIo = 3;

struct MatchOptions {
  std::string config_file;
  bool no_template = false;
  bool no_str1 = false;
  bool no_str2 = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_features;
  std::optional<int> orientations;
  std::optional<int> octaves;
  std::optional<int> window;
  std::optional<int> subregions;
};

void add_config_flags(CLI::App* cmd, MatchOptions& o) {
  cmd->add_option("--config", o.config_file, "key=value configuration file");
  cmd->add_flag("--no-template", o.no_template, "skip template rematching");
  cmd->add_flag("--no-str1", o.no_str1, "disable secondary orientations");
  cmd->add_flag("--no-str2", o.no_str2, "use a single index map");
  cmd->add_option("--seed", o.seed, "consensus seed (default 42)");
  cmd->add_option("--max-features", o.max_features);
  cmd->add_option("--orientations", o.orientations);
  cmd->add_option("--octaves", o.octaves);
  cmd->add_option("--window", o.window);
  cmd->add_option("--subregions", o.subregions);
}

nisr::PipelineConfig make_config(const MatchOptions& o) {
  nisr::PipelineConfig cfg;
  if (!o.config_file.empty()) cfg.apply(nisr::read_config_file(o.config_file));
  if (o.no_template) cfg.use_template = false;
  if (o.no_str1) cfg.str1 = false;
  if (o.no_str2) cfg.str2 = false;
  if (o.seed) cfg.seed = *o.seed;
  if (o.max_features) cfg.max_features = *o.max_features;
  if (o.orientations) cfg.n_orients = *o.orientations;
  if (o.octaves) cfg.n_octaves = *o.octaves;
  if (o.window) cfg.window = *o.window;
  if (o.subregions) cfg.subregions = *o.subregions;
  cfg.validate();
  return cfg;
}

void print_summary(const nisr::PipelineResult& r) {
  const auto& s = r.stats;
  std::fprintf(stderr,
               "features %d/%d  putative %d  feature inliers %d  template accepted %d  final %d\n"
               "scale %.6f  rotation %.4f deg  t (%.3f, %.3f)\n",
               s.ref_features, s.sen_features, s.putative_matches, s.feature_inliers, s.template_accepted,
               s.final_matches, r.transform.scale, r.transform.rotation * 180.0 / std::numbers::pi, r.transform.tx,
               r.transform.ty);
}

nisr::RealGrid index_levels(const nisr::IndexGrid& map, int levels) {
  nisr::RealGrid out(map.rows(), map.cols());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = std::round(255.0 * map[i] / levels) / 255.0;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal image registration by phase-congruency features and template rematching"};
  app.require_subcommand(1);

  std::string ref_path, sen_path, out_path, matches_path, checkpoints_path, out_registered, out_fusion, out_dir;
  double threshold = 5.0;
  int steps = 24;
  bool sweep_rotation = false;
  bool sweep_scale = false;

  MatchOptions match_opts;
  auto* match = app.add_subcommand("match", "match two images and write a match file");
  match->add_option("REF", ref_path)->required();
  match->add_option("SEN", sen_path)->required();
  match->add_option("--out", out_path, "match JSON (stdout when omitted)");
  add_config_flags(match, match_opts);

  auto* reg = app.add_subcommand("register", "warp the sensed image and render a checkerboard fusion");
  reg->add_option("REF", ref_path)->required();
  reg->add_option("SEN", sen_path)->required();
  reg->add_option("--matches", matches_path)->required();
  reg->add_option("--out-registered", out_registered)->required();
  reg->add_option("--out-fusion", out_fusion)->required();

  auto* eval = app.add_subcommand("eval", "score a match file against checkpoints");
  eval->add_option("--matches", matches_path)->required();
  eval->add_option("--checkpoints", checkpoints_path)->required();
  eval->add_option("--threshold", threshold, "success threshold in pixels");

  MatchOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "rotation or scale sweep against planted transforms");
  sweep->add_option("REF", ref_path)->required();
  auto* rot_flag = sweep->add_flag("--rotation", sweep_rotation);
  sweep->add_flag("--scale", sweep_scale)->excludes(rot_flag);
  sweep->add_option("--steps", steps);
  sweep->add_option("--out", out_path)->required();
  sweep->add_option("--threshold", threshold);
  add_config_flags(sweep, sweep_opts);

  MatchOptions debug_opts;
  auto* debug = app.add_subcommand("debug-maps", "dump phase congruency, weighted moment and index maps");
  debug->add_option("REF", ref_path)->required();
  debug->add_option("--out-dir", out_dir)->required();
  add_config_flags(debug, debug_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*match) {
      const nisr::PipelineConfig cfg = make_config(match_opts);
      const nisr::GrayImage ref = nisr::load_image(ref_path);
      const nisr::GrayImage sen = nisr::load_image(sen_path);
      const nisr::PipelineResult result = nisr::match_pipeline(ref, sen, cfg);
      print_summary(result);
      if (out_path.empty()) {
        std::cout << nisr::match_json(result, cfg);
      } else {
        nisr::write_match_file(out_path, result, cfg);
      }
    } else if (*reg) {
      const nisr::GrayImage ref = nisr::load_image(ref_path);
      const nisr::GrayImage sen = nisr::load_image(sen_path);
      const nisr::MatchFile file = nisr::read_match_file(matches_path);
      const nisr::Registration r = nisr::register_and_fuse(ref, sen, file.transform);
      nisr::save_png(r.registered, out_registered);
      nisr::save_png(r.fusion, out_fusion);
    } else if (*eval) {
      const nisr::MatchFile file = nisr::read_match_file(matches_path);
      const nisr::CheckpointSet cps = nisr::read_checkpoints(checkpoints_path);
      nisr::PipelineResult result{file.matches, file.transform, file.stats};
      const nisr::EvalReport report = nisr::make_report(&result, cps, threshold);
      std::printf("NM %d\nRMSE %.4f\nsuccess %s\n", report.nm, report.rmse, report.success ? "true" : "false");
      return report.success ? kExitOk : kExitMatchFailure;
    } else if (*sweep) {
      const nisr::PipelineConfig cfg = make_config(sweep_opts);
      const nisr::GrayImage ref = nisr::load_image(ref_path);
      const auto kind = sweep_scale ? nisr::SweepKind::Scale : nisr::SweepKind::Rotation;
      const auto curve = nisr::sweep_harness(ref, kind, steps, cfg, threshold);
      nisr::write_sweep_csv(out_path, curve);
      int ok = 0;
      for (const auto& s : curve) ok += s.report.success ? 1 : 0;
      std::fprintf(stderr, "%d/%zu steps succeeded\n", ok, curve.size());
    } else if (*debug) {
      const nisr::PipelineConfig cfg = make_config(debug_opts);
      const nisr::GrayImage ref = nisr::load_image(ref_path);
      nisr::LayerAnalysisParams lp = nisr::layer_params(cfg);
      lp.keep_pc = true;
      const nisr::LayerAnalysis a = nisr::analyze_layer(ref, lp);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      nisr::RealGrid pc_sum(ref.rows(), ref.cols());
      for (const auto& layer : a.pc.pc) {
        for (std::size_t i = 0; i < layer.size(); ++i) pc_sum[i] += layer[i];
      }
      nisr::save_png(pc_sum, dir / "pc.png", true);
      nisr::save_png(a.weighted, dir / "weighted_moment.png", true);
      if (cfg.str2) {
        const nisr::IndexMapPair maps = nisr::index_maps(a.orientation_amplitude);
        nisr::save_png(index_levels(maps.odd, maps.levels), dir / "index_odd.png");
        nisr::save_png(index_levels(maps.even, maps.levels), dir / "index_even.png");
      } else {
        nisr::save_png(index_levels(nisr::full_index_map(a.orientation_amplitude), cfg.n_orients),
                       dir / "index_full.png");
      }
    }
  } catch (const nisr::MatchingFailure& e) {
    std::fprintf(stderr, "matching failed: %s\n", e.what());
    return kExitMatchFailure;
  } catch (const nisr::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  } catch (const nisr::InvalidArgument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitIo;
  }
  return kExitOk;
}
