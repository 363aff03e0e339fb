#ifndef CAUSEWAY_BOOSTED_TREES_H_
#define CAUSEWAY_BOOSTED_TREES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace causeway {

// Describes one model input. Categorical features hold level codes
// 0..num_levels-1 stored as doubles.
struct FeatureSpec {
  std::string name;
  bool categorical = false;
  int num_levels = 0;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

// Column-major feature table.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<FeatureSpec> specs, std::vector<std::vector<double>> columns);
  // A table with no columns still has rows (intercept-only models).
  explicit FeatureMatrix(std::size_t num_rows) : num_rows_(num_rows) {}

  std::size_t num_rows() const { return num_rows_; }
  std::size_t num_features() const { return specs_.size(); }
  const std::vector<FeatureSpec>& specs() const { return specs_; }
  std::span<const double> column(std::size_t f) const { return columns_[f]; }
  double value(std::size_t row, std::size_t f) const { return columns_[f][row]; }
  // Copies row `r` into `out` (size num_features()).
  void row(std::size_t r, std::span<double> out) const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

 private:
  std::vector<FeatureSpec> specs_;
  std::vector<std::vector<double>> columns_;
  std::size_t num_rows_ = 0;
};

struct BoostConfig {
  int max_trees = 15000;
  double shrinkage = 0.01;
  // Maximum number of split levels per tree; 2 gives at most four leaves.
  int interaction_depth = 2;
  // Minimum number of observations in each child of a split.
  int min_node = 10;
  double subsample_fraction = 1.0;
  // 0 disables cross-validation; otherwise >= 2.
  int cv_folds = 0;
  std::uint64_t seed = 1;

  void validate(std::size_t num_rows) const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults.
  static BoostConfig from_json(const nlohmann::json& doc);
};

// Predicted probabilities are clamped to [kProbFloor, 1 - kProbFloor].
inline constexpr double kProbFloor = 1e-6;

double logistic(double score);
double clamp_probability(double p);

struct TreeNode {
  // -1 marks a leaf.
  int feature = -1;
  bool categorical = false;
  // Continuous split: x <= threshold goes left.
  double threshold = 0;
  // Categorical split: levels listed here go left, all others right.
  std::vector<int> left_levels;
  int left = -1;
  int right = -1;
  double value = 0;

  bool is_leaf() const { return feature < 0; }
};

// Axis-aligned regression tree; nodes[0] is the root.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  double evaluate(std::span<const double> row) const;
  int depth() const;
  std::size_t num_leaves() const;
};

// Stagewise logistic boosting model:
//   score_m(x) = initial_score + shrinkage * sum_{j <= m} tree_j(x).
class BoostModel {
 public:
  BoostModel() = default;

  const std::vector<FeatureSpec>& features() const { return features_; }
  double initial_score() const { return initial_score_; }
  double shrinkage() const { return shrinkage_; }
  int interaction_depth() const { return interaction_depth_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  int num_trees() const { return static_cast<int>(trees_.size()); }
  // Weighted mean Bernoulli deviance on the training rows, stages 1..M.
  const std::vector<double>& train_deviance() const { return train_deviance_; }
  double initial_deviance() const { return initial_deviance_; }
  // Held-out deviance for stages 1..M; empty when fitted without CV.
  const std::vector<double>& cv_deviance() const { return cv_deviance_; }
  bool has_cv() const { return !cv_deviance_.empty(); }
  // Set when the training target had a single class.
  bool single_class() const { return single_class_; }

  // Raw score after `stage` trees (all trees when nullopt).
  double score(std::span<const double> row, std::optional<int> stage = std::nullopt) const;
  // logistic(score), clamped away from 0 and 1.
  double predict_proba(std::span<const double> row,
                       std::optional<int> stage = std::nullopt) const;

  nlohmann::json to_json() const;
  static BoostModel from_json(const nlohmann::json& doc);

 private:
  friend BoostModel fit(const FeatureMatrix&, std::span<const int>, std::span<const double>,
                        const BoostConfig&);
  friend BoostModel make_model(std::vector<FeatureSpec>, double, double,
                               std::vector<RegressionTree>);

  std::vector<FeatureSpec> features_;
  double initial_score_ = 0;
  double shrinkage_ = 1;
  int interaction_depth_ = 1;
  std::vector<RegressionTree> trees_;
  double initial_deviance_ = 0;
  std::vector<double> train_deviance_;
  std::vector<double> cv_deviance_;
  bool single_class_ = false;
};

// Assembles a model from explicit parts (deserialization, tests).
BoostModel make_model(std::vector<FeatureSpec> features, double initial_score, double shrinkage,
                      std::vector<RegressionTree> trees);

// Fits a boosted logistic model of `target` (0/1) on `x`. `weights` may be
// empty (unit weights). Deterministic in cfg.seed.
BoostModel fit(const FeatureMatrix& x, std::span<const int> target, std::span<const double> weights,
               const BoostConfig& cfg);

// Stage (1-based) with the smallest value, earliest on ties. Element i of
// `deviance_by_stage` belongs to stage i + 1.
int argmin_stage(std::span<const double> deviance_by_stage);
// argmin_stage over the model's CV curve; throws when fitted without CV.
int select_stage_cv(const BoostModel& model);

// Mean weighted Bernoulli deviance of scores against 0/1 targets.
double bernoulli_deviance(std::span<const double> scores, std::span<const int> target,
                          std::span<const double> weights);

}  // namespace causeway

#endif  // CAUSEWAY_BOOSTED_TREES_H_
