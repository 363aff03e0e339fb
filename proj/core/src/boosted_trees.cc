#include "causeway/boosted_trees.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "causeway/error.h"
#include "causeway/parallel.h"
#include "causeway/rng.h"

namespace causeway {
namespace {

constexpr int kMaxContinuousBins = 256;
constexpr int kMaxSubsetLevels = 12;
// A split must explain more than this fraction of the node's weighted
// squared residual; guards against splitting on rounding noise.
constexpr double kRelativeMinGain = 1e-13;

double softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

// Deviance contribution 2 * [log(1 + e^s) - y s] of one observation.
double unit_deviance(double score, int y) { return 2.0 * (softplus(score) - y * score); }

struct BinnedFeature {
  bool categorical = false;
  int num_bins = 0;
  // Continuous: largest training value falling in each bin.
  std::vector<double> upper;
};

BinnedFeature bin_spec(const FeatureSpec& spec, std::span<const double> values) {
  BinnedFeature b;
  b.categorical = spec.categorical;
  if (spec.categorical) {
    b.num_bins = spec.num_levels;
    return b;
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> unique = sorted;
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (static_cast<int>(unique.size()) <= kMaxContinuousBins) {
    b.upper = std::move(unique);
  } else {
    for (int q = 1; q <= kMaxContinuousBins; ++q) {
      const std::size_t pos = (sorted.size() * q + kMaxContinuousBins - 1) / kMaxContinuousBins - 1;
      const double edge = sorted[pos];
      if (b.upper.empty() || edge > b.upper.back()) b.upper.push_back(edge);
    }
  }
  b.num_bins = static_cast<int>(b.upper.size());
  return b;
}

int bin_of(const BinnedFeature& b, double v) {
  if (b.categorical) return static_cast<int>(v);
  auto it = std::lower_bound(b.upper.begin(), b.upper.end(), v);
  if (it == b.upper.end()) return b.num_bins - 1;
  return static_cast<int>(it - b.upper.begin());
}

// Training rows after merging identical (features, target) records.
struct WorkSet {
  std::size_t num_features = 0;
  std::vector<std::uint16_t> bins;  // row-major
  std::vector<int> y;
  std::vector<double> w;
  std::vector<double> count;
  std::size_t size() const { return y.size(); }
  std::uint16_t bin(std::size_t r, std::size_t f) const { return bins[r * num_features + f]; }
};

WorkSet build_workset(const FeatureMatrix& x, const std::vector<BinnedFeature>& binned,
                      std::span<const int> target, std::span<const double> weights, bool merge) {
  const std::size_t n = x.num_rows();
  const std::size_t nf = x.num_features();
  std::vector<std::uint16_t> raw(n * nf);
  for (std::size_t f = 0; f < nf; ++f) {
    auto col = x.column(f);
    for (std::size_t r = 0; r < n; ++r) {
      raw[r * nf + f] = static_cast<std::uint16_t>(bin_of(binned[f], col[r]));
    }
  }
  auto weight = [&](std::size_t r) { return weights.empty() ? 1.0 : weights[r]; };

  WorkSet ws;
  ws.num_features = nf;
  if (!merge) {
    ws.bins = std::move(raw);
    ws.y.assign(target.begin(), target.end());
    ws.w.resize(n);
    for (std::size_t r = 0; r < n; ++r) ws.w[r] = weight(r);
    ws.count.assign(n, 1.0);
    return ws;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    const auto* pa = &raw[a * nf];
    const auto* pb = &raw[b * nf];
    for (std::size_t f = 0; f < nf; ++f) {
      if (pa[f] != pb[f]) return pa[f] < pb[f];
    }
    return target[a] < target[b];
  };
  auto same = [&](std::size_t a, std::size_t b) {
    return target[a] == target[b] && std::equal(&raw[a * nf], &raw[a * nf] + nf, &raw[b * nf]);
  };
  std::stable_sort(order.begin(), order.end(), less);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    double w = 0;
    while (j < n && same(order[i], order[j])) {
      w += weight(order[j]);
      ++j;
    }
    ws.bins.insert(ws.bins.end(), &raw[order[i] * nf], &raw[order[i] * nf] + nf);
    ws.y.push_back(target[order[i]]);
    ws.w.push_back(w);
    ws.count.push_back(static_cast<double>(j - i));
    i = j;
  }
  return ws;
}

struct SplitChoice {
  double gain = 0;
  int feature = -1;
  int bin = -1;                 // continuous: last bin going left
  std::vector<int> left_levels;  // categorical
};

class TreeBuilder {
 public:
  TreeBuilder(const WorkSet& ws, const std::vector<BinnedFeature>& binned,
              const std::vector<double>& residual, const std::vector<double>& hessian,
              const BoostConfig& cfg)
      : ws_(ws), binned_(binned), r_(residual), h_(hessian), cfg_(cfg) {
    int max_bins = 1;
    for (const auto& b : binned_) max_bins = std::max(max_bins, b.num_bins);
    hs_.resize(max_bins);
    hw_.resize(max_bins);
    hc_.resize(max_bins);
  }

  RegressionTree build(std::vector<std::size_t> rows) {
    RegressionTree tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  int grow(RegressionTree& tree, std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double s = 0, w = 0, c = 0, q = 0, hsum = 0;
    for (std::size_t r : rows) {
      const double wr = ws_.w[r] * r_[r];
      s += wr;
      w += ws_.w[r];
      c += ws_.count[r];
      q += wr * r_[r];
      hsum += ws_.w[r] * h_[r];
    }
    if (depth < cfg_.interaction_depth && c >= 2.0 * cfg_.min_node && w > 0) {
      SplitChoice best = find_split(rows, s, w, q);
      if (best.feature >= 0) {
        std::vector<std::size_t> left_rows, right_rows;
        const auto& bf = binned_[best.feature];
        for (std::size_t r : rows) {
          const int b = ws_.bin(r, best.feature);
          const bool left = bf.categorical ? std::binary_search(best.left_levels.begin(),
                                                                best.left_levels.end(), b)
                                           : b <= best.bin;
          (left ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        TreeNode node;
        node.feature = best.feature;
        node.categorical = bf.categorical;
        if (bf.categorical) {
          node.left_levels = std::move(best.left_levels);
        } else {
          node.threshold = bf.upper[best.bin];
        }
        const int left = grow(tree, std::move(left_rows), depth + 1);
        const int right = grow(tree, std::move(right_rows), depth + 1);
        node.left = left;
        node.right = right;
        tree.nodes[id] = std::move(node);
        return id;
      }
    }
    tree.nodes[id].value = hsum > 1e-300 ? s / hsum : 0.0;
    return id;
  }

  void consider(SplitChoice& best, double gain, int feature, int bin,
                std::vector<int>* levels) const {
    if (gain > best.gain) {
      best.gain = gain;
      best.feature = feature;
      best.bin = bin;
      if (levels) {
        best.left_levels = *levels;
      } else {
        best.left_levels.clear();
      }
    }
  }

  SplitChoice find_split(const std::vector<std::size_t>& rows, double s, double w, double q) {
    SplitChoice best;
    best.gain = std::max(0.0, kRelativeMinGain * q);
    const double base = s * s / w;
    const double min_count = cfg_.min_node;
    auto gain_of = [&](double sl, double wl, double cl, double c_total) -> double {
      const double sr = s - sl;
      const double wr = w - wl;
      const double cr = c_total - cl;
      if (cl < min_count || cr < min_count || !(wl > 0) || !(wr > 0)) return -1.0;
      return sl * sl / wl + sr * sr / wr - base;
    };
    double c_total = 0;
    for (std::size_t r : rows) c_total += ws_.count[r];

    for (std::size_t f = 0; f < binned_.size(); ++f) {
      const auto& bf = binned_[f];
      const int nb = bf.num_bins;
      std::fill(hs_.begin(), hs_.begin() + nb, 0.0);
      std::fill(hw_.begin(), hw_.begin() + nb, 0.0);
      std::fill(hc_.begin(), hc_.begin() + nb, 0.0);
      for (std::size_t r : rows) {
        const int b = ws_.bin(r, f);
        hs_[b] += ws_.w[r] * r_[r];
        hw_[b] += ws_.w[r];
        hc_[b] += ws_.count[r];
      }
      const int fi = static_cast<int>(f);
      if (!bf.categorical) {
        double sl = 0, wl = 0, cl = 0;
        for (int b = 0; b + 1 < nb; ++b) {
          if (hc_[b] == 0) continue;
          sl += hs_[b];
          wl += hw_[b];
          cl += hc_[b];
          consider(best, gain_of(sl, wl, cl, c_total), fi, b, nullptr);
        }
        continue;
      }
      std::vector<int> present;
      for (int b = 0; b < nb; ++b) {
        if (hc_[b] > 0) present.push_back(b);
      }
      if (present.size() < 2) continue;
      if (present.size() <= kMaxSubsetLevels) {
        const int p = static_cast<int>(present.size());
        const std::uint32_t masks = 1u << (p - 1);
        std::vector<int> levels;
        for (std::uint32_t m = 1; m < masks; ++m) {
          double sl = 0, wl = 0, cl = 0;
          for (int i = 0; i + 1 < p; ++i) {
            if (m & (1u << i)) {
              sl += hs_[present[i]];
              wl += hw_[present[i]];
              cl += hc_[present[i]];
            }
          }
          const double g = gain_of(sl, wl, cl, c_total);
          if (g > best.gain) {
            levels.clear();
            for (int i = 0; i + 1 < p; ++i) {
              if (m & (1u << i)) levels.push_back(present[i]);
            }
            consider(best, g, fi, -1, &levels);
          }
        }
      } else {
        // Order levels by mean residual; the best contiguous prefix is optimal
        // for squared-error gain.
        std::vector<int> ordered = present;
        std::stable_sort(ordered.begin(), ordered.end(), [&](int a, int b) {
          const double ma = hw_[a] > 0 ? hs_[a] / hw_[a] : 0.0;
          const double mb = hw_[b] > 0 ? hs_[b] / hw_[b] : 0.0;
          return ma < mb;
        });
        double sl = 0, wl = 0, cl = 0;
        for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
          sl += hs_[ordered[i]];
          wl += hw_[ordered[i]];
          cl += hc_[ordered[i]];
          const double g = gain_of(sl, wl, cl, c_total);
          if (g > best.gain) {
            std::vector<int> levels(ordered.begin(), ordered.begin() + i + 1);
            std::sort(levels.begin(), levels.end());
            consider(best, g, fi, -1, &levels);
          }
        }
      }
    }
    return best;
  }

  const WorkSet& ws_;
  const std::vector<BinnedFeature>& binned_;
  const std::vector<double>& r_;
  const std::vector<double>& h_;
  const BoostConfig& cfg_;
  std::vector<double> hs_, hw_, hc_;
};

// Value a tree assigns to a binned training row.
double evaluate_binned(const RegressionTree& tree, const WorkSet& ws, std::size_t r,
                       const std::vector<BinnedFeature>& binned) {
  int id = 0;
  for (;;) {
    const TreeNode& node = tree.nodes[id];
    if (node.is_leaf()) return node.value;
    const int b = ws.bin(r, node.feature);
    bool left;
    if (node.categorical) {
      left = std::binary_search(node.left_levels.begin(), node.left_levels.end(), b);
    } else {
      left = binned[node.feature].upper[b] <= node.threshold;
    }
    id = left ? node.left : node.right;
  }
}

void check_inputs(const FeatureMatrix& x, std::span<const int> target,
                  std::span<const double> weights) {
  if (x.num_rows() == 0) throw Error("boost fit: empty data");
  if (target.size() != x.num_rows()) throw Error("boost fit: target length differs from rows");
  for (int y : target) {
    if (y != 0 && y != 1) throw Error("boost fit: target must be 0/1");
  }
  if (!weights.empty()) {
    if (weights.size() != x.num_rows()) throw Error("boost fit: weight length differs from rows");
    double total = 0;
    for (double w : weights) {
      if (!(w >= 0) || !std::isfinite(w)) throw Error("boost fit: weights must be finite and >= 0");
      total += w;
    }
    if (!(total > 0)) throw Error("boost fit: weights sum to zero");
  }
}

BoostModel fit_core(const FeatureMatrix& x, std::span<const int> target,
                    std::span<const double> weights, const BoostConfig& cfg,
                    double& initial_deviance, std::vector<double>& train_deviance,
                    bool& single_class, double& initial_score) {
  const std::size_t nf = x.num_features();
  std::vector<BinnedFeature> binned;
  binned.reserve(nf);
  for (std::size_t f = 0; f < nf; ++f) binned.push_back(bin_spec(x.specs()[f], x.column(f)));
  for (const auto& b : binned) {
    if (b.num_bins > 65535) throw Error("boost fit: too many categorical levels");
  }

  const bool subsample = cfg.subsample_fraction < 1.0;
  const WorkSet ws = build_workset(x, binned, target, weights, !subsample);
  const std::size_t n = ws.size();

  double wy = 0, wsum = 0;
  bool has0 = false, has1 = false;
  for (std::size_t r = 0; r < n; ++r) {
    wy += ws.w[r] * ws.y[r];
    wsum += ws.w[r];
    (ws.y[r] ? has1 : has0) = true;
  }
  single_class = !(has0 && has1);
  const double base = clamp_probability(wy / wsum);
  initial_score = std::log(base / (1.0 - base));

  std::vector<double> score(n, initial_score);
  auto deviance = [&] {
    double d = 0;
    for (std::size_t r = 0; r < n; ++r) d += ws.w[r] * unit_deviance(score[r], ws.y[r]);
    return d / wsum;
  };
  initial_deviance = deviance();

  std::vector<double> residual(n), hessian(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  Rng rng = make_rng(cfg.seed, 0x5AB5);
  const std::size_t bag =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.subsample_fraction * n)));

  std::vector<RegressionTree> trees;
  trees.reserve(cfg.max_trees);
  train_deviance.clear();
  train_deviance.reserve(cfg.max_trees);
  TreeBuilder builder(ws, binned, residual, hessian, cfg);
  for (int m = 0; m < cfg.max_trees; ++m) {
    for (std::size_t r = 0; r < n; ++r) {
      const double p = logistic(score[r]);
      residual[r] = ws.y[r] - p;
      hessian[r] = p * (1.0 - p);
    }
    std::vector<std::size_t> rows;
    if (subsample) {
      std::vector<std::size_t> perm = all;
      for (std::size_t i = 0; i < bag; ++i) {
        std::swap(perm[i], perm[i + uniform_index(rng, n - i)]);
      }
      rows.assign(perm.begin(), perm.begin() + bag);
      std::sort(rows.begin(), rows.end());
    } else {
      rows = all;
    }
    RegressionTree tree = builder.build(std::move(rows));
    for (std::size_t r = 0; r < n; ++r) {
      score[r] += cfg.shrinkage * evaluate_binned(tree, ws, r, binned);
    }
    trees.push_back(std::move(tree));
    train_deviance.push_back(deviance());
  }
  return make_model(x.specs(), initial_score, cfg.shrinkage, std::move(trees));
}

nlohmann::json tree_to_json(const RegressionTree& tree, int id) {
  const TreeNode& n = tree.nodes[id];
  if (n.is_leaf()) return nlohmann::json{{"leaf", n.value}};
  nlohmann::json out{{"feature", n.feature}};
  if (n.categorical) {
    out["left_levels"] = n.left_levels;
  } else {
    out["threshold"] = n.threshold;
  }
  out["left"] = tree_to_json(tree, n.left);
  out["right"] = tree_to_json(tree, n.right);
  return out;
}

int tree_from_json(const nlohmann::json& doc, RegressionTree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (doc.contains("leaf")) {
    tree.nodes[id].value = doc.at("leaf").get<double>();
    return id;
  }
  TreeNode node;
  node.feature = doc.at("feature").get<int>();
  if (doc.contains("left_levels")) {
    node.categorical = true;
    node.left_levels = doc.at("left_levels").get<std::vector<int>>();
    std::sort(node.left_levels.begin(), node.left_levels.end());
  } else {
    node.threshold = doc.at("threshold").get<double>();
  }
  node.left = tree_from_json(doc.at("left"), tree);
  node.right = tree_from_json(doc.at("right"), tree);
  tree.nodes[id] = std::move(node);
  return id;
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::vector<FeatureSpec> specs, std::vector<std::vector<double>> columns)
    : specs_(std::move(specs)), columns_(std::move(columns)) {
  if (specs_.size() != columns_.size()) throw Error("feature matrix: spec/column count mismatch");
  num_rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    if (columns_[f].size() != num_rows_) throw Error("feature matrix: ragged columns");
    const auto& spec = specs_[f];
    for (double v : columns_[f]) {
      if (!std::isfinite(v)) throw Error("feature matrix: non-finite value in '" + spec.name + "'");
      if (spec.categorical && (v != std::floor(v) || v < 0 || v >= spec.num_levels)) {
        throw Error("feature matrix: level code out of range in '" + spec.name + "'");
      }
    }
  }
}

void FeatureMatrix::row(std::size_t r, std::span<double> out) const {
  for (std::size_t f = 0; f < columns_.size(); ++f) out[f] = columns_[f][r];
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    cols[f].reserve(rows.size());
    for (std::size_t r : rows) cols[f].push_back(columns_[f][r]);
  }
  FeatureMatrix out;
  out.specs_ = specs_;
  out.columns_ = std::move(cols);
  out.num_rows_ = rows.size();
  return out;
}

void BoostConfig::validate(std::size_t num_rows) const {
  if (max_trees < 1) throw Error("boost config: max_trees must be >= 1");
  if (!(shrinkage > 0 && shrinkage <= 1)) throw Error("boost config: shrinkage must be in (0, 1]");
  if (interaction_depth < 1) throw Error("boost config: interaction_depth must be >= 1");
  if (min_node < 1) throw Error("boost config: min_node must be >= 1");
  if (!(subsample_fraction > 0 && subsample_fraction <= 1)) {
    throw Error("boost config: subsample_fraction must be in (0, 1]");
  }
  if (cv_folds == 1 || cv_folds < 0 ||
      (cv_folds >= 2 && static_cast<std::size_t>(cv_folds) > num_rows)) {
    throw Error("boost config: cv_folds must be 0 or in [2, N]");
  }
}

nlohmann::json BoostConfig::to_json() const {
  return nlohmann::json{{"max_trees", max_trees},
                        {"shrinkage", shrinkage},
                        {"interaction_depth", interaction_depth},
                        {"min_node", min_node},
                        {"subsample_fraction", subsample_fraction},
                        {"cv_folds", cv_folds},
                        {"seed", seed}};
}

BoostConfig BoostConfig::from_json(const nlohmann::json& doc) {
  BoostConfig c;
  c.max_trees = doc.value("max_trees", c.max_trees);
  c.shrinkage = doc.value("shrinkage", c.shrinkage);
  c.interaction_depth = doc.value("interaction_depth", c.interaction_depth);
  c.min_node = doc.value("min_node", c.min_node);
  c.subsample_fraction = doc.value("subsample_fraction", c.subsample_fraction);
  c.cv_folds = doc.value("cv_folds", c.cv_folds);
  c.seed = doc.value("seed", c.seed);
  return c;
}

double logistic(double score) {
  if (score >= 0) return 1.0 / (1.0 + std::exp(-score));
  const double e = std::exp(score);
  return e / (1.0 + e);
}

double clamp_probability(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

double RegressionTree::evaluate(std::span<const double> row) const {
  int id = 0;
  for (;;) {
    const TreeNode& node = nodes[id];
    if (node.is_leaf()) return node.value;
    const double v = row[node.feature];
    bool left;
    if (node.categorical) {
      left = std::binary_search(node.left_levels.begin(), node.left_levels.end(),
                                static_cast<int>(v));
    } else {
      left = v <= node.threshold;
    }
    id = left ? node.left : node.right;
  }
}

int RegressionTree::depth() const {
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const TreeNode& n = nodes[id];
    if (n.is_leaf()) {
      best = std::max(best, d);
    } else {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return best;
}

std::size_t RegressionTree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double BoostModel::score(std::span<const double> row, std::optional<int> stage) const {
  if (row.size() != features_.size()) {
    throw Error("boost predict: row has " + std::to_string(row.size()) + " features, model has " +
                std::to_string(features_.size()));
  }
  const int m = stage.value_or(num_trees());
  if (m < 0 || m > num_trees()) {
    throw Error("boost predict: stage " + std::to_string(m) + " outside [0, " +
                std::to_string(num_trees()) + "]");
  }
  double s = 0;
  for (int j = 0; j < m; ++j) s += trees_[j].evaluate(row);
  return initial_score_ + shrinkage_ * s;
}

double BoostModel::predict_proba(std::span<const double> row, std::optional<int> stage) const {
  return clamp_probability(logistic(score(row, stage)));
}

nlohmann::json BoostModel::to_json() const {
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& f : features_) {
    feats.push_back({{"name", f.name}, {"categorical", f.categorical}, {"num_levels", f.num_levels}});
  }
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(tree_to_json(t, 0));
  nlohmann::json out{{"features", std::move(feats)},
                     {"initial_score", initial_score_},
                     {"shrinkage", shrinkage_},
                     {"interaction_depth", interaction_depth_},
                     {"trees", std::move(trees)},
                     {"initial_deviance", initial_deviance_},
                     {"train_deviance", train_deviance_},
                     {"single_class", single_class_}};
  if (has_cv()) out["cv_deviance"] = cv_deviance_;
  return out;
}

BoostModel BoostModel::from_json(const nlohmann::json& doc) {
  try {
    std::vector<FeatureSpec> feats;
    for (const auto& f : doc.at("features")) {
      feats.push_back({f.at("name").get<std::string>(), f.at("categorical").get<bool>(),
                       f.value("num_levels", 0)});
    }
    std::vector<RegressionTree> trees;
    for (const auto& t : doc.at("trees")) {
      RegressionTree tree;
      tree_from_json(t, tree);
      trees.push_back(std::move(tree));
    }
    BoostModel m = make_model(std::move(feats), doc.at("initial_score").get<double>(),
                              doc.at("shrinkage").get<double>(), std::move(trees));
    m.interaction_depth_ = doc.value("interaction_depth", m.interaction_depth_);
    m.initial_deviance_ = doc.value("initial_deviance", 0.0);
    m.train_deviance_ = doc.value("train_deviance", std::vector<double>{});
    m.cv_deviance_ = doc.value("cv_deviance", std::vector<double>{});
    m.single_class_ = doc.value("single_class", false);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("boost model json: ") + e.what());
  }
}

BoostModel make_model(std::vector<FeatureSpec> features, double initial_score, double shrinkage,
                      std::vector<RegressionTree> trees) {
  BoostModel m;
  m.features_ = std::move(features);
  m.initial_score_ = initial_score;
  m.shrinkage_ = shrinkage;
  int depth = 1;
  for (const auto& t : trees) depth = std::max(depth, t.depth());
  m.interaction_depth_ = depth;
  m.trees_ = std::move(trees);
  return m;
}

BoostModel fit(const FeatureMatrix& x, std::span<const int> target, std::span<const double> weights,
               const BoostConfig& cfg) {
  check_inputs(x, target, weights);
  cfg.validate(x.num_rows());

  double initial_deviance = 0, initial_score = 0;
  std::vector<double> train_dev;
  bool single_class = false;
  BoostModel model =
      fit_core(x, target, weights, cfg, initial_deviance, train_dev, single_class, initial_score);
  model.interaction_depth_ = cfg.interaction_depth;
  model.initial_deviance_ = initial_deviance;
  model.train_deviance_ = std::move(train_dev);
  model.single_class_ = single_class;

  if (cfg.cv_folds >= 2) {
    const std::size_t n = x.num_rows();
    const int k = cfg.cv_folds;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = make_rng(cfg.seed, 0xF01D);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    std::vector<int> fold(n);
    for (std::size_t i = 0; i < n; ++i) fold[perm[i]] = static_cast<int>(i % k);

    // Per-fold weighted held-out deviance sums for stages 1..M.
    std::vector<std::vector<double>> fold_dev(k);
    std::vector<double> fold_weight(k, 0.0);
    BoostConfig sub = cfg;
    sub.cv_folds = 0;
    parallel_for(static_cast<std::size_t>(k), [&](std::size_t fk) {
      std::vector<std::size_t> train_rows, held_rows;
      for (std::size_t i = 0; i < n; ++i) {
        (fold[i] == static_cast<int>(fk) ? held_rows : train_rows).push_back(i);
      }
      std::vector<int> ty;
      std::vector<double> tw;
      for (std::size_t i : train_rows) {
        ty.push_back(target[i]);
        if (!weights.empty()) tw.push_back(weights[i]);
      }
      double d0 = 0, s0 = 0;
      std::vector<double> dv;
      bool sc = false;
      BoostModel fm =
          fit_core(x.select_rows(train_rows), ty, tw, sub, d0, dv, sc, s0);
      std::vector<double> dev(cfg.max_trees, 0.0);
      std::vector<double> row(x.num_features());
      double wsum = 0;
      for (std::size_t i : held_rows) {
        x.row(i, row);
        const double w = weights.empty() ? 1.0 : weights[i];
        wsum += w;
        double s = fm.initial_score();
        for (int m = 0; m < fm.num_trees(); ++m) {
          s += fm.shrinkage() * fm.trees()[m].evaluate(row);
          dev[m] += w * unit_deviance(s, target[i]);
        }
      }
      fold_dev[fk] = std::move(dev);
      fold_weight[fk] = wsum;
    });
    std::vector<double> cv(cfg.max_trees, 0.0);
    double total_w = 0;
    for (int fk = 0; fk < k; ++fk) {
      total_w += fold_weight[fk];
      for (int m = 0; m < cfg.max_trees; ++m) cv[m] += fold_dev[fk][m];
    }
    if (!(total_w > 0)) throw Error("boost fit: held-out folds carry no weight");
    for (double& v : cv) v /= total_w;
    model.cv_deviance_ = std::move(cv);
  }
  return model;
}

int argmin_stage(std::span<const double> deviance_by_stage) {
  if (deviance_by_stage.empty()) throw Error("argmin_stage: empty deviance curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < deviance_by_stage.size(); ++i) {
    if (deviance_by_stage[i] < deviance_by_stage[best]) best = i;
  }
  return static_cast<int>(best) + 1;
}

int select_stage_cv(const BoostModel& model) {
  if (!model.has_cv()) throw Error("select_stage_cv: model was fitted without cross-validation");
  return argmin_stage(model.cv_deviance());
}

double bernoulli_deviance(std::span<const double> scores, std::span<const int> target,
                          std::span<const double> weights) {
  double d = 0, wsum = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    d += w * unit_deviance(scores[i], target[i]);
    wsum += w;
  }
  return wsum > 0 ? d / wsum : 0.0;
}

}  // namespace causeway
