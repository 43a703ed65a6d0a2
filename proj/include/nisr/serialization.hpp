#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nisr/evaluation.hpp"
#include "nisr/matching.hpp"
#include "nisr/pipeline.hpp"

namespace nisr {

/// Contents of a match file.
struct MatchFile {
  std::map<std::string, std::string> config;
  SimilarityTransform transform;
  StageStats stats;
  std::vector<Match> matches;
};

/// Deterministic JSON text: no timing or host information.
std::string match_json(const PipelineResult& result, const PipelineConfig& cfg);
void write_match_file(const std::filesystem::path& path, const PipelineResult& result, const PipelineConfig& cfg);
/// Throws IoError on unreadable or malformed files.
MatchFile read_match_file(const std::filesystem::path& path);
MatchFile parse_match_json(const std::string& text);

/// JSON array of {"ref":[x,y],"sen":[x,y]}.
CheckpointSet read_checkpoints(const std::filesystem::path& path);
CheckpointSet parse_checkpoints(const std::string& text);
void write_checkpoints(const std::filesystem::path& path, const CheckpointSet& cps);

/// Columns: step_value, nm, rmse, success.
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepStep> steps);

}  // namespace nisr
