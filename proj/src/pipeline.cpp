#include "nisr/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace nisr {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw InvalidArgument("bad integer for " + key + ": " + v);
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(out)) throw InvalidArgument("");
    return out;
  } catch (const std::exception&) {
    throw InvalidArgument("bad number for " + key + ": " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw InvalidArgument("bad boolean for " + key + ": " + v);
}

template <typename Visitor>
void visit_fields(PipelineConfig& c, Visitor&& v) {
  v("n_octaves", c.n_octaves);
  v("n_scales", c.n_scales);
  v("n_orients", c.n_orients);
  v("window", c.window);
  v("subregions", c.subregions);
  v("max_features", c.max_features);
  v("tau", c.tau);
  v("moment_weight_additive", c.moment_weight_additive);
  v("pyramid_sigma", c.pyramid_sigma);
  v("min_wavelength", c.min_wavelength);
  v("scale_step", c.scale_step);
  v("sigma_r", c.sigma_r);
  v("noise_k", c.noise_k);
  v("fast_threshold", c.fast_threshold);
  v("secondary_ratio", c.secondary_ratio);
  v("use_template", c.use_template);
  v("str1", c.str1);
  v("str2", c.str2);
  v("mutual_nn", c.mutual_nn);
  v("fsc_tolerance", c.fsc_tolerance);
  v("fsc_iters", c.fsc_iters);
  v("seed", c.seed);
  v("template_window", c.template_window);
  v("template_threshold", c.template_threshold);
  v("template_pool_reference", c.template_pool_reference);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void PipelineConfig::validate() const {
  if (n_octaves < 1) throw InvalidArgument("n_octaves must be positive");
  if (n_scales < 1) throw InvalidArgument("n_scales must be positive");
  if (n_orients < 4 || n_orients % 2 != 0) throw InvalidArgument("n_orients must be even and >= 4");
  if (window <= 0 || subregions <= 0 || window % subregions != 0) {
    throw InvalidArgument("window must be a positive multiple of subregions");
  }
  if (use_template && (n_orients % 4 != 0 || n_orients < 8)) {
    throw InvalidArgument("template stage uses n_orients / 2 orientations, so n_orients must be a multiple of 4 and >= 8");
  }
  if (max_features <= 0) throw InvalidArgument("max_features must be positive");
  if (!(tau >= 0.5 && tau <= 1.0)) throw InvalidArgument("tau must lie in [0.5, 1]");
  if (!(pyramid_sigma > 0.0)) throw InvalidArgument("pyramid_sigma must be positive");
  if (!(fsc_tolerance > 0.0) || fsc_iters <= 0) throw InvalidArgument("invalid consensus settings");
  if (template_window < 8 || template_window % 2 != 0) throw InvalidArgument("template_window must be even and >= 8");
}

void PipelineConfig::apply(const std::map<std::string, std::string>& values) {
  std::set<std::string> known;
  visit_fields(*this, [&](const char* name, auto& field) {
    known.insert(name);
    const auto it = values.find(name);
    if (it == values.end()) return;
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_same_v<T, bool>) {
      field = parse_bool(name, it->second);
    } else if constexpr (std::is_same_v<T, int>) {
      field = parse_int(name, it->second);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      const int v = parse_int(name, it->second);
      if (v < 0) throw InvalidArgument("seed must be non-negative");
      field = static_cast<std::uint64_t>(v);
    } else {
      field = parse_double(name, it->second);
    }
  });
  for (const auto& [key, value] : values) {
    if (!known.contains(key)) throw InvalidArgument("unknown config key: " + key);
  }
}

std::map<std::string, std::string> PipelineConfig::to_map() const {
  std::map<std::string, std::string> out;
  PipelineConfig copy = *this;
  visit_fields(copy, [&](const char* name, auto& field) {
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_same_v<T, bool>) {
      out[name] = field ? "true" : "false";
    } else if constexpr (std::is_same_v<T, double>) {
      out[name] = format_double(field);
    } else {
      out[name] = std::to_string(field);
    }
  });
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::map<std::string, std::string> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    values[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
  }
  return values;
}

double resolution_match_sigma(double scale) {
  if (!(scale > 1.0)) return 0.0;
  // Native sampling blur (half a sensed pixel) plus the triangle kernel of
  // bilinear upsampling, both measured in reference pixels.
  return std::sqrt((scale * scale - 1.0) * (0.25 + 1.0 / 6.0));
}

LayerAnalysisParams layer_params(const PipelineConfig& cfg) {
  LayerAnalysisParams p;
  p.filters.n_scales = cfg.n_scales;
  p.filters.n_orients = cfg.n_orients;
  p.filters.min_wavelength = cfg.min_wavelength;
  p.filters.scale_step = cfg.scale_step;
  p.filters.sigma_r = cfg.sigma_r;
  p.pc.noise_k = cfg.noise_k;
  p.pc.scale_step = cfg.scale_step;
  p.tau = cfg.tau;
  p.sign = cfg.moment_weight_additive ? MomentWeightSign::Additive : MomentWeightSign::AsPrinted;
  p.keep_pc = false;
  return p;
}

namespace {

DescriptorParams descriptor_params(const PipelineConfig& cfg) {
  DescriptorParams p;
  p.window = cfg.window;
  p.subregions = cfg.subregions;
  p.secondary_ratio = cfg.secondary_ratio;
  p.use_secondary = cfg.str1;
  p.double_map = cfg.str2;
  return p;
}

FscParams fsc_params(const PipelineConfig& cfg) {
  FscParams p;
  p.inlier_tol = cfg.fsc_tolerance;
  p.max_iters = cfg.fsc_iters;
  p.seed = cfg.seed;
  return p;
}

}  // namespace

ImageAnalysis analyze_image(const GrayImage& image, const PipelineConfig& cfg) {
  cfg.validate();
  const int octaves = supported_octaves(image.rows(), image.cols(), cfg.n_octaves);
  if (octaves < 1) throw InvalidArgument("image smaller than the minimum pyramid size");
  const ScaleSpace space = build_scale_space(image, octaves, cfg.pyramid_sigma);
  const LayerAnalysisParams lp = layer_params(cfg);

  ImageAnalysis out;
  out.rows = image.rows();
  out.cols = image.cols();
  out.octaves_used = octaves;
  out.image = image;

  std::vector<LayerDetections> detections;
  std::vector<DescriptionMaps> maps;
  for (int id = 0; id < space.layer_count(); ++id) {
    const GrayImage& layer = space.layer(id);
    LayerAnalysis analysis = analyze_layer(layer, lp);
    DetectionParams dp;
    dp.threshold = cfg.fast_threshold;
    dp.max_per_layer = cfg.max_features;
    detections.push_back({detect(analysis.weighted, id, space.layer_scale(id), dp),
                          static_cast<long long>(layer.rows()) * layer.cols()});
    maps.push_back(make_description_maps(analysis.orientation_amplitude, cfg.str2));
    if (id == 0 && cfg.use_template && cfg.template_pool_reference) {
      out.base_amplitude = std::move(analysis.orientation_amplitude);
    }
  }

  out.features = collect_features(detections, cfg.max_features);
  const DescriptorParams dp = descriptor_params(cfg);
  std::size_t begin = 0;
  while (begin < out.features.size()) {
    std::size_t end = begin;
    const int layer_id = out.features[begin].layer_id;
    while (end < out.features.size() && out.features[end].layer_id == layer_id) ++end;
    const std::span<const FeaturePoint> layer_features(out.features.data() + begin, end - begin);
    auto descs = describe_features(maps[layer_id], layer_features, dp, static_cast<int>(begin));
    std::move(descs.begin(), descs.end(), std::back_inserter(out.descriptors));
    begin = end;
  }
  return out;
}

PipelineResult match_pipeline(const GrayImage& ref, const GrayImage& sen, const PipelineConfig& cfg) {
  return match_pipeline(analyze_image(ref, cfg), sen, cfg);
}

PipelineResult match_pipeline(const ImageAnalysis& ref_analysis, const GrayImage& sen, const PipelineConfig& cfg) {
  cfg.validate();
  const ImageAnalysis sen_analysis = analyze_image(sen, cfg);

  PipelineResult result;
  StageStats& stats = result.stats;
  stats.ref_features = static_cast<int>(ref_analysis.features.size());
  stats.sen_features = static_cast<int>(sen_analysis.features.size());
  stats.ref_descriptors = static_cast<int>(ref_analysis.descriptors.size());
  stats.sen_descriptors = static_cast<int>(sen_analysis.descriptors.size());
  if (ref_analysis.descriptors.empty() || sen_analysis.descriptors.empty()) {
    throw MatchingFailure("feature stage failed: no descriptors in one of the images");
  }

  NnMatchParams nn;
  nn.mutual = cfg.mutual_nn;
  const std::vector<Match> putative = nn_match(ref_analysis.descriptors, sen_analysis.descriptors, nn);
  stats.putative_matches = static_cast<int>(putative.size());
  if (putative.size() < 2) throw MatchingFailure("feature stage failed: fewer than 2 putative matches");

  FscResult feature_fsc;
  try {
    feature_fsc = fsc_filter(putative, fsc_params(cfg));
  } catch (const MatchingFailure& e) {
    throw MatchingFailure(std::string("feature stage failed: ") + e.what());
  }
  std::vector<Match> feature_inliers;
  for (std::size_t i : feature_fsc.inliers) feature_inliers.push_back(putative[i]);
  stats.feature_inliers = static_cast<int>(feature_inliers.size());
  stats.feature_stage_ok = true;

  result.matches = feature_inliers;
  result.transform = feature_fsc.transform;
  if (!cfg.use_template) {
    stats.final_matches = static_cast<int>(result.matches.size());
    return result;
  }

  // Template stage: reference points not already matched, deduplicated on the
  // pixel grid.
  std::set<std::pair<long, long>> taken;
  for (const Match& m : feature_inliers) {
    for (long dy = -1; dy <= 1; ++dy) {
      for (long dx = -1; dx <= 1; ++dx) taken.emplace(std::lround(m.ref.x) + dx, std::lround(m.ref.y) + dy);
    }
  }
  std::vector<Point2> candidates;
  for (const FeaturePoint& f : ref_analysis.features) {
    const Point2 p = f.original();
    const std::pair<long, long> key{std::lround(p.x), std::lround(p.y)};
    if (taken.insert(key).second) candidates.push_back({static_cast<double>(key.first), static_cast<double>(key.second)});
  }
  stats.template_candidates = static_cast<int>(candidates.size());

  const double m_scale = result.transform.scale;
  const GrayImage sen_source =
      m_scale < 1.0 ? smooth(sen, gaussian_kernel(0.5 * std::sqrt(1.0 / (m_scale * m_scale) - 1.0))) : sen;
  const WarpResult resampled = resample_sensed(sen_source, result.transform, ref_analysis.rows, ref_analysis.cols);
  LogGaborParams template_filters = layer_params(cfg).filters;
  template_filters.n_orients = cfg.n_orients / 2;
  const OrientationAmplitude resampled_ao = orientation_amplitude(resampled.image, template_filters);
  OrientationAmplitude ref_ao;
  if (cfg.template_pool_reference) {
    ref_ao = pool_orientation_pairs(ref_analysis.base_amplitude);
  } else {
    const double sigma = resolution_match_sigma(m_scale);
    ref_ao = orientation_amplitude(sigma > 0.0 ? smooth(ref_analysis.image, gaussian_kernel(sigma)) : ref_analysis.image,
                                   template_filters);
  }

  TemplateParams tp;
  tp.window = cfg.template_window;
  tp.accept_threshold = cfg.template_threshold;
  tp.orientations = cfg.n_orients / 2;
  const std::vector<Match> template_matches =
      rematch(candidates, ref_ao, resampled_ao, resampled.valid, result.transform, tp, sen.rows(), sen.cols());
  stats.template_accepted = static_cast<int>(template_matches.size());

  std::vector<Match> merged = feature_inliers;
  if (template_matches.size() >= 2) {
    try {
      const FscResult t = fsc_filter(template_matches, fsc_params(cfg));
      for (std::size_t i : t.inliers) merged.push_back(template_matches[i]);
      stats.template_inliers = static_cast<int>(t.inliers.size());
    } catch (const MatchingFailure&) {
      // No consensus among template matches: the stage adds nothing.
    }
  }

  if (merged.size() > feature_inliers.size()) {
    try {
      const FscResult final_fsc = fsc_filter(merged, fsc_params(cfg));
      if (final_fsc.inliers.size() >= feature_inliers.size()) {
        result.matches.clear();
        for (std::size_t i : final_fsc.inliers) result.matches.push_back(merged[i]);
        result.transform = final_fsc.transform;
        stats.template_gain = result.matches.size() > feature_inliers.size();
      }
    } catch (const MatchingFailure&) {
    }
  }
  stats.final_matches = static_cast<int>(result.matches.size());
  return result;
}

}  // namespace nisr
