#include "nisr/matching.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace nisr {

Point2 SimilarityTransform::apply(const Point2& p) const {
  const double c = scale * std::cos(rotation);
  const double s = scale * std::sin(rotation);
  return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
}

SimilarityTransform SimilarityTransform::inverse() const {
  if (!valid()) throw InvalidArgument("cannot invert a degenerate similarity transform");
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = -rotation;
  const Point2 t = SimilarityTransform{inv.scale, inv.rotation, 0.0, 0.0}.apply({tx, ty});
  inv.tx = -t.x;
  inv.ty = -t.y;
  return inv;
}

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& other) const {
  SimilarityTransform out;
  out.scale = scale * other.scale;
  out.rotation = rotation + other.rotation;
  const Point2 t = apply({other.tx, other.ty});
  out.tx = t.x;
  out.ty = t.y;
  return out;
}

bool SimilarityTransform::valid() const {
  return std::isfinite(scale) && scale > 0.0 && std::isfinite(rotation) && std::isfinite(tx) && std::isfinite(ty);
}

std::string_view to_string(MatchStage stage) { return stage == MatchStage::Feature ? "feature" : "template"; }

MatchStage match_stage_from_string(std::string_view name) {
  if (name == "feature") return MatchStage::Feature;
  if (name == "template") return MatchStage::Template;
  throw InvalidArgument("unknown match stage: " + std::string(name));
}

double descriptor_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw InvalidArgument("descriptor lengths differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix stack_descriptors(std::span<const Descriptor> descs, std::size_t dim) {
  RowMatrix m(static_cast<Eigen::Index>(descs.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < descs.size(); ++i) {
    if (descs[i].values.size() != dim) throw InvalidArgument("descriptor lengths differ");
    std::copy(descs[i].values.begin(), descs[i].values.end(), m.row(static_cast<Eigen::Index>(i)).data());
  }
  return m;
}

// Two best candidates by approximate squared distance.
struct TopTwo {
  float best = std::numeric_limits<float>::infinity();
  float second = std::numeric_limits<float>::infinity();
  int best_index = -1;
  int second_index = -1;

  void offer(float d, int index) {
    if (d < best) {
      second = best;
      second_index = best_index;
      best = d;
      best_index = index;
    } else if (d < second) {
      second = d;
      second_index = index;
    }
  }
};

// Resolves near-ties of the float pass with exact double distances; the
// lower index wins exact ties.
int resolve(const TopTwo& top, std::span<const float> query, std::span<const Descriptor> pool) {
  constexpr float kTieBand = 1e-4f;
  if (top.second_index < 0 || top.second - top.best > kTieBand) return top.best_index;
  const double d1 = descriptor_distance(query, pool[top.best_index].values);
  const double d2 = descriptor_distance(query, pool[top.second_index].values);
  if (d2 < d1 || (d2 == d1 && top.second_index < top.best_index)) return top.second_index;
  return top.best_index;
}

int owner(const Descriptor& d, std::size_t index) {
  return d.feature_index >= 0 ? d.feature_index : -1 - static_cast<int>(index);
}

}  // namespace

std::vector<Match> nn_match(std::span<const Descriptor> ref, std::span<const Descriptor> sen,
                            const NnMatchParams& params) {
  if (ref.empty() || sen.empty()) throw InvalidArgument("nn_match needs non-empty descriptor lists");
  const std::size_t dim = ref.front().values.size();
  const RowMatrix r = stack_descriptors(ref, dim);
  const RowMatrix s = stack_descriptors(sen, dim);
  const Eigen::VectorXf r_norm = r.rowwise().squaredNorm();
  const Eigen::VectorXf s_norm = s.rowwise().squaredNorm();

  std::vector<TopTwo> sen_best(sen.size());
  std::vector<TopTwo> ref_best(ref.size());
  constexpr Eigen::Index kBlock = 1024;
  for (Eigen::Index start = 0; start < r.rows(); start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, r.rows() - start);
    const RowMatrix dots = r.middleRows(start, rows) * s.transpose();
    for (Eigen::Index i = 0; i < rows; ++i) {
      const int ri = static_cast<int>(start + i);
      for (Eigen::Index j = 0; j < dots.cols(); ++j) {
        const float d2 = r_norm[start + i] + s_norm[j] - 2.0f * dots(i, j);
        sen_best[j].offer(d2, ri);
        ref_best[ri].offer(d2, static_cast<int>(j));
      }
    }
  }

  std::vector<Match> candidates;
  for (std::size_t j = 0; j < sen.size(); ++j) {
    const int ri = resolve(sen_best[j], sen[j].values, ref);
    if (params.mutual && resolve(ref_best[ri], ref[ri].values, sen) != static_cast<int>(j)) continue;
    Match m;
    m.ref = ref[ri].location;
    m.sen = sen[j].location;
    m.distance = descriptor_distance(ref[ri].values, sen[j].values);
    m.stage = MatchStage::Feature;
    m.ref_feature = owner(ref[ri], ri);
    m.sen_feature = owner(sen[j], j);
    candidates.push_back(m);
  }

  // One match per feature on each side; the smallest distance survives and
  // equal distances keep the earlier candidate.
  auto keep_best_per = [](std::vector<Match> in, auto key) {
    std::map<int, std::size_t> best;
    for (std::size_t i = 0; i < in.size(); ++i) {
      auto [it, inserted] = best.try_emplace(key(in[i]), i);
      if (!inserted && in[i].distance < in[it->second].distance) it->second = i;
    }
    std::vector<std::size_t> keep;
    for (const auto& [k, idx] : best) keep.push_back(idx);
    std::sort(keep.begin(), keep.end());
    std::vector<Match> out;
    for (std::size_t idx : keep) out.push_back(in[idx]);
    return out;
  };
  candidates = keep_best_per(std::move(candidates), [](const Match& m) { return m.sen_feature; });
  candidates = keep_best_per(std::move(candidates), [](const Match& m) { return m.ref_feature; });
  return candidates;
}

SimilarityTransform estimate_similarity(std::span<const Point2> sen, std::span<const Point2> ref) {
  if (sen.size() != ref.size()) throw InvalidArgument("point lists differ in length");
  if (sen.size() < 2) throw InvalidArgument("similarity estimation needs at least 2 pairs");
  const double n = static_cast<double>(sen.size());
  Point2 ms{}, mr{};
  for (std::size_t i = 0; i < sen.size(); ++i) {
    ms.x += sen[i].x / n;
    ms.y += sen[i].y / n;
    mr.x += ref[i].x / n;
    mr.y += ref[i].y / n;
  }
  double spread = 0.0;
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < sen.size(); ++i) {
    const double sx = sen[i].x - ms.x;
    const double sy = sen[i].y - ms.y;
    const double rx = ref[i].x - mr.x;
    const double ry = ref[i].y - mr.y;
    spread += sx * sx + sy * sy;
    a += sx * rx + sy * ry;
    b += sx * ry - sy * rx;
  }
  if (spread <= 1e-12 * std::max(1.0, std::abs(ms.x) + std::abs(ms.y))) {
    throw InvalidArgument("sensed points are coincident");
  }
  a /= spread;
  b /= spread;
  SimilarityTransform m;
  m.scale = std::hypot(a, b);
  if (!(m.scale > 0.0)) throw InvalidArgument("degenerate similarity (zero scale)");
  m.rotation = std::atan2(b, a);
  m.tx = mr.x - (a * ms.x - b * ms.y);
  m.ty = mr.y - (b * ms.x + a * ms.y);
  return m;
}

SimilarityTransform estimate_similarity(std::span<const Match> matches) {
  std::vector<Point2> sen, ref;
  for (const Match& m : matches) {
    sen.push_back(m.sen);
    ref.push_back(m.ref);
  }
  return estimate_similarity(sen, ref);
}

double reprojection_error(const SimilarityTransform& m, const Match& match) {
  const Point2 p = m.apply(match.sen);
  return std::hypot(p.x - match.ref.x, p.y - match.ref.y);
}

namespace {

struct Consensus {
  std::vector<std::size_t> inliers;
  double residual = 0.0;
};

Consensus classify(const SimilarityTransform& m, std::span<const Match> matches, double tol) {
  Consensus c;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const double e = reprojection_error(m, matches[i]);
    if (e <= tol) {
      c.inliers.push_back(i);
      c.residual += e;
    }
  }
  return c;
}

bool better(const Consensus& a, const Consensus& b) {
  if (a.inliers.size() != b.inliers.size()) return a.inliers.size() > b.inliers.size();
  return a.residual < b.residual;
}

SimilarityTransform fit(std::span<const Match> matches, const std::vector<std::size_t>& subset) {
  std::vector<Match> chosen;
  chosen.reserve(subset.size());
  for (std::size_t i : subset) chosen.push_back(matches[i]);
  return estimate_similarity(chosen);
}

}  // namespace

FscResult fsc_filter(std::span<const Match> matches, const FscParams& params) {
  const std::size_t n = matches.size();
  if (n < 2) throw InvalidArgument("consensus needs at least 2 matches");

  std::vector<std::size_t> by_distance(n);
  std::iota(by_distance.begin(), by_distance.end(), 0);
  std::stable_sort(by_distance.begin(), by_distance.end(),
                   [&](std::size_t a, std::size_t b) { return matches[a].distance < matches[b].distance; });
  const std::size_t pool = std::min(n, std::max<std::size_t>(n / 4, 8));

  std::mt19937_64 rng(params.seed);
  Consensus best;
  SimilarityTransform best_model;
  bool have_model = false;
  for (int iter = 0; iter < params.max_iters; ++iter) {
    const std::size_t range = iter % 2 == 0 ? pool : n;
    std::uniform_int_distribution<std::size_t> pick(0, range - 1);
    const std::size_t i = by_distance[pick(rng)];
    const std::size_t j = by_distance[pick(rng)];
    if (i == j) continue;
    const Point2 sen[2] = {matches[i].sen, matches[j].sen};
    const Point2 ref[2] = {matches[i].ref, matches[j].ref};
    if (std::hypot(sen[0].x - sen[1].x, sen[0].y - sen[1].y) < 1e-6) continue;
    if (std::hypot(ref[0].x - ref[1].x, ref[0].y - ref[1].y) < 1e-6) continue;
    const SimilarityTransform model = estimate_similarity(sen, ref);
    Consensus c = classify(model, matches, params.inlier_tol);
    if (!have_model || better(c, best)) {
      best = std::move(c);
      best_model = model;
      have_model = true;
    }
  }
  if (!have_model || static_cast<int>(best.inliers.size()) < params.min_inliers) {
    throw MatchingFailure("no consensus with at least " + std::to_string(params.min_inliers) + " inliers");
  }

  SimilarityTransform model = best_model;
  std::vector<std::size_t> inliers = best.inliers;
  for (int round = 0; round < params.refine_rounds; ++round) {
    SimilarityTransform refined;
    try {
      refined = fit(matches, inliers);
    } catch (const InvalidArgument&) {
      break;
    }
    Consensus c = classify(refined, matches, params.inlier_tol);
    if (static_cast<int>(c.inliers.size()) < params.min_inliers) break;
    model = refined;
    if (c.inliers == inliers) break;
    inliers = std::move(c.inliers);
  }
  // The returned set is always the exact classification under the returned model.
  inliers = classify(model, matches, params.inlier_tol).inliers;
  return {std::move(inliers), model};
}

}  // namespace nisr
