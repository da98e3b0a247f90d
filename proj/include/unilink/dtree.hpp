#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "unilink/page_type.hpp"
#include "unilink/vectorize.hpp"

namespace unilink {

using ClassCounts = std::array<std::size_t, kPageTypeCount>;

inline std::size_t total_count(const ClassCounts& counts) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  return total;
}

// Majority class; ties resolved by PageType declaration order.
PageType majority_class(const ClassCounts& counts);

enum class SplitCriterion {
  Entropy,  // -sum p*log2(p)
  Gini,     // 1 - sum p^2
};

std::string_view criterion_name(SplitCriterion criterion);
std::optional<SplitCriterion> parse_criterion(std::string_view name);

struct TrainingSet {
  std::vector<LabeledVector> rows;

  std::size_t size() const { return rows.size(); }
  ClassCounts class_counts() const;
};

// Impurity of a class distribution under the given criterion. Throws on an
// empty distribution.
double impurity(const ClassCounts& counts, SplitCriterion criterion);

// I(S) - sum |Si|/|S| * I(Si). Throws when the partition's sizes do not sum
// to the parent's.
double information_gain(const TrainingSet& parent,
                        const std::vector<TrainingSet>& partition,
                        SplitCriterion criterion);

// Binary tree; internal nodes route weight <= threshold to the left child.
// Every node keeps the training class counts that reached it, which pruning
// and leaf predictions are derived from.
struct TreeNode {
  // internal
  FeatureId feature = -1;
  double threshold = 0.0;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
  // leaf payload (counts are kept on internal nodes too)
  ClassCounts class_counts{};
  PageType prediction = PageType::About;

  bool is_leaf() const { return left == nullptr; }
};

struct TreeHyperparams {
  std::size_t min_leaf = 2;
  std::optional<std::size_t> max_depth;
  double min_gain = 1e-12;
};

struct SplitChoice {
  FeatureId feature;
  double threshold;
  double gain;
};

// Candidate thresholds are midpoints between consecutive distinct observed
// weights of a feature (absent entries count as weight 0). Maximizes gain;
// ties broken by lower feature id, then lower threshold, with gains within
// 1e-9 treated as tied so rounding noise cannot reorder equal candidates.
// Empty when no candidate beats min_gain.
std::optional<SplitChoice> best_split(const TrainingSet& data,
                                      const std::set<FeatureId>& allowed,
                                      SplitCriterion criterion,
                                      double min_gain);

// Same search with an arbitrary impurity function; the criterion overload
// routes through this. Exposed so tests can swap the impurity (for example a
// natural-log entropy) and check the chosen split is unchanged.
using ImpurityFn = std::function<double(const ClassCounts&)>;
std::optional<SplitChoice> best_split_with_impurity(
    const TrainingSet& data, const std::set<FeatureId>& allowed,
    const ImpurityFn& impurity_fn, double min_gain);

// Recursive growth. Leaves appear when (a) the node is pure, (b) fewer than
// 2*min_leaf rows remain, (c) the depth limit is reached, or (d) no split
// clears min_gain.
std::unique_ptr<TreeNode> grow(const TrainingSet& data,
                               const std::set<FeatureId>& allowed,
                               SplitCriterion criterion,
                               const TreeHyperparams& hyperparams);

// Reduced-error pruning: bottom-up, a subtree collapses to its majority leaf
// whenever accuracy on the validation set does not decrease. Never increases
// the node count. Throws on an empty validation set.
std::unique_ptr<TreeNode> prune(std::unique_ptr<TreeNode> root,
                                const TrainingSet& validation);

std::size_t count_nodes(const TreeNode& node);
std::size_t tree_depth(const TreeNode& node);

struct DecisionTreeModel {
  std::unique_ptr<TreeNode> root;
  SplitCriterion criterion = SplitCriterion::Entropy;
  std::size_t vocab_size = 0;
  TreeHyperparams hyperparams;
  std::string vocab_checksum;
  // Term for each feature id; entries never referenced by the tree may be
  // empty after an import.
  std::vector<std::string> feature_terms;
};

// Root-to-leaf traversal; absent features weigh 0. Throws when the vector
// references a feature id outside the model's vocabulary.
PageType predict(const DecisionTreeModel& model, const FeatureVector& vector);

// Feature ids appearing in internal nodes ("features used by the tree").
std::set<FeatureId> used_features(const TreeNode& root);
std::set<FeatureId> restrict_to_used_features(const DecisionTreeModel& model);

// Indented text rendering, one line per node: internal nodes as
// "term <= threshold" (left = the <=-branch, listed first), leaves as
// "-> Label (n)". Terms resolve back to feature ids through the vocabulary,
// so import_text(export_text(m), v) is predict-equivalent to m and re-exports
// byte-identically.
std::string export_text(const DecisionTreeModel& model);
DecisionTreeModel import_text(const std::string& text, const Vocabulary& vocab);

// Model file = header (criterion, hyperparams, vocabulary size and checksum)
// plus the export_text body. load_model rejects a vocabulary whose checksum
// differs from the one recorded at save time.
void save_model(const DecisionTreeModel& model,
                const std::filesystem::path& path);
DecisionTreeModel load_model(const std::filesystem::path& path,
                             const Vocabulary& vocab);

}  // namespace unilink
