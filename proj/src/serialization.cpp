#include "nisr/serialization.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace nisr {

using nlohmann::ordered_json;

namespace {

ordered_json stats_json(const StageStats& s) {
  ordered_json j;
  j["ref_features"] = s.ref_features;
  j["sen_features"] = s.sen_features;
  j["ref_descriptors"] = s.ref_descriptors;
  j["sen_descriptors"] = s.sen_descriptors;
  j["putative_matches"] = s.putative_matches;
  j["feature_inliers"] = s.feature_inliers;
  j["template_candidates"] = s.template_candidates;
  j["template_accepted"] = s.template_accepted;
  j["template_inliers"] = s.template_inliers;
  j["final_matches"] = s.final_matches;
  j["feature_stage_ok"] = s.feature_stage_ok;
  j["template_gain"] = s.template_gain;
  return j;
}

StageStats stats_from_json(const ordered_json& j) {
  StageStats s;
  s.ref_features = j.value("ref_features", 0);
  s.sen_features = j.value("sen_features", 0);
  s.ref_descriptors = j.value("ref_descriptors", 0);
  s.sen_descriptors = j.value("sen_descriptors", 0);
  s.putative_matches = j.value("putative_matches", 0);
  s.feature_inliers = j.value("feature_inliers", 0);
  s.template_candidates = j.value("template_candidates", 0);
  s.template_accepted = j.value("template_accepted", 0);
  s.template_inliers = j.value("template_inliers", 0);
  s.final_matches = j.value("final_matches", 0);
  s.feature_stage_ok = j.value("feature_stage_ok", false);
  s.template_gain = j.value("template_gain", false);
  return s;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

Point2 point_from(const ordered_json& j) {
  if (!j.is_array() || j.size() != 2) throw IoError("point must be [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

std::string match_json(const PipelineResult& result, const PipelineConfig& cfg) {
  ordered_json root;
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : cfg.to_map()) config[k] = v;
  root["config"] = config;
  root["transform"] = {{"scale", result.transform.scale},
                       {"rotation_deg", result.transform.rotation * 180.0 / std::numbers::pi},
                       {"tx", result.transform.tx},
                       {"ty", result.transform.ty}};
  root["stats"] = stats_json(result.stats);
  ordered_json matches = ordered_json::array();
  for (const Match& m : result.matches) {
    matches.push_back({{"rx", m.ref.x},
                       {"ry", m.ref.y},
                       {"sx", m.sen.x},
                       {"sy", m.sen.y},
                       {"dist", m.distance},
                       {"stage", std::string(to_string(m.stage))}});
  }
  root["matches"] = std::move(matches);
  return root.dump(2) + "\n";
}

void write_match_file(const std::filesystem::path& path, const PipelineResult& result, const PipelineConfig& cfg) {
  spill(path, match_json(result, cfg));
}

MatchFile parse_match_json(const std::string& text) {
  try {
    const ordered_json root = ordered_json::parse(text);
    MatchFile file;
    if (root.contains("config")) {
      for (const auto& [k, v] : root.at("config").items()) {
        file.config[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    const ordered_json& t = root.at("transform");
    file.transform.scale = t.at("scale").get<double>();
    file.transform.rotation = t.at("rotation_deg").get<double>() * std::numbers::pi / 180.0;
    file.transform.tx = t.at("tx").get<double>();
    file.transform.ty = t.at("ty").get<double>();
    if (root.contains("stats")) file.stats = stats_from_json(root.at("stats"));
    for (const ordered_json& m : root.at("matches")) {
      Match match;
      match.ref = {m.at("rx").get<double>(), m.at("ry").get<double>()};
      match.sen = {m.at("sx").get<double>(), m.at("sy").get<double>()};
      match.distance = m.at("dist").get<double>();
      match.stage = match_stage_from_string(m.at("stage").get<std::string>());
      file.matches.push_back(match);
    }
    return file;
  } catch (const ordered_json::exception& e) {
    throw IoError(std::string("malformed match file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("malformed match file: ") + e.what());
  }
}

MatchFile read_match_file(const std::filesystem::path& path) { return parse_match_json(slurp(path)); }

CheckpointSet parse_checkpoints(const std::string& text) {
  try {
    const ordered_json root = ordered_json::parse(text);
    if (!root.is_array()) throw IoError("checkpoint file must hold an array");
    CheckpointSet cps;
    for (const ordered_json& e : root) cps.pairs.push_back({point_from(e.at("ref")), point_from(e.at("sen"))});
    if (cps.pairs.empty()) throw IoError("checkpoint file is empty");
    return cps;
  } catch (const ordered_json::exception& e) {
    throw IoError(std::string("malformed checkpoint file: ") + e.what());
  }
}

CheckpointSet read_checkpoints(const std::filesystem::path& path) { return parse_checkpoints(slurp(path)); }

void write_checkpoints(const std::filesystem::path& path, const CheckpointSet& cps) {
  ordered_json root = ordered_json::array();
  for (const Checkpoint& cp : cps.pairs) {
    root.push_back({{"ref", {cp.ref.x, cp.ref.y}}, {"sen", {cp.sen.x, cp.sen.y}}});
  }
  spill(path, root.dump(2) + "\n");
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepStep> steps) {
  std::ostringstream out;
  out.precision(10);
  out << "step_value,nm,rmse,success\n";
  for (const SweepStep& s : steps) {
    out << s.value << ',' << s.report.nm << ',';
    if (std::isfinite(s.report.rmse)) {
      out << s.report.rmse;
    } else {
      out << "nan";
    }
    out << ',' << (s.report.success ? 1 : 0) << '\n';
  }
  spill(path, out.str());
}

}  // namespace nisr
