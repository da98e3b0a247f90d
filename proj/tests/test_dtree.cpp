#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/temp_dir.hpp"
#include "unilink/dtree.hpp"
#include "unilink/errors.hpp"
#include "unilink/rng.hpp"

using namespace unilink;
using unilink::testsupport::read_file;
using unilink::testsupport::TempDir;

namespace {

// The oracles below recompute impurities and gains from scratch with the same
// arithmetic shape as the production code (class-order sums, child term
// (nl*Il + nr*Ir)/n) but independent search mechanics, so agreement is exact,
// not approximate.
double oracle_entropy(const ClassCounts& counts) {
  const std::size_t total = total_count(counts);
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double oracle_entropy_nats(const ClassCounts& counts) {
  const std::size_t total = total_count(counts);
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

double oracle_gini(const ClassCounts& counts) {
  const std::size_t total = total_count(counts);
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double oracle_impurity(const ClassCounts& counts, SplitCriterion criterion) {
  return criterion == SplitCriterion::Entropy ? oracle_entropy(counts)
                                              : oracle_gini(counts);
}

// Exhaustive (feature, midpoint) enumeration with per-candidate recounting.
std::optional<SplitChoice> oracle_best_split(const TrainingSet& data,
                                             const std::set<FeatureId>& allowed,
                                             SplitCriterion criterion,
                                             double min_gain) {
  const std::size_t n = data.size();
  const double parent_impurity =
      oracle_impurity(data.class_counts(), criterion);
  std::optional<SplitChoice> best;
  for (FeatureId feature : allowed) {
    std::vector<double> weights;
    for (const auto& row : data.rows) weights.push_back(row.first.weight(feature));
    std::sort(weights.begin(), weights.end());
    weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      const double threshold = (weights[i] + weights[i + 1]) / 2.0;
      ClassCounts left{};
      ClassCounts right{};
      std::size_t n_left = 0;
      for (const auto& [vec, label] : data.rows) {
        if (vec.weight(feature) <= threshold) {
          ++left[index_of(label)];
          ++n_left;
        } else {
          ++right[index_of(label)];
        }
      }
      const std::size_t n_right = n - n_left;
      const double child_term =
          static_cast<double>(n_left) * oracle_impurity(left, criterion) +
          static_cast<double>(n_right) * oracle_impurity(right, criterion);
      const double gain = parent_impurity - child_term / static_cast<double>(n);
      // Same near-tie rule as the library: the first candidate in
      // (feature, threshold) order wins unless beaten by more than 1e-9.
      if (!best || gain > best->gain + 1e-9) {
        best = SplitChoice{feature, threshold, gain};
      }
    }
  }
  if (best && best->gain <= min_gain) return std::nullopt;
  return best;
}

FeatureVector fv(std::initializer_list<std::pair<FeatureId, double>> entries) {
  FeatureVector vec;
  for (const auto& [id, weight] : entries) {
    if (weight != 0.0) vec.entries[id] = weight;
  }
  return vec;
}

TrainingSet random_training_set(Rng& rng, std::size_t n_rows,
                                std::size_t n_features) {
  static const double kLevels[] = {0.0, 0.5, 1.0};
  TrainingSet data;
  for (std::size_t r = 0; r < n_rows; ++r) {
    FeatureVector vec;
    for (std::size_t f = 0; f < n_features; ++f) {
      const double weight = kLevels[draw_below(rng, 3)];
      if (weight != 0.0) vec.entries[static_cast<FeatureId>(f)] = weight;
    }
    data.rows.emplace_back(std::move(vec),
                           static_cast<PageType>(draw_below(rng, kPageTypeCount)));
  }
  return data;
}

std::set<FeatureId> feature_range(std::size_t n) {
  std::set<FeatureId> ids;
  for (std::size_t f = 0; f < n; ++f) ids.insert(static_cast<FeatureId>(f));
  return ids;
}

std::size_t correct_on(const TreeNode& root, const TrainingSet& data) {
  std::size_t correct = 0;
  for (const auto& [vec, label] : data.rows) {
    const TreeNode* node = &root;
    while (!node->is_leaf()) {
      node = vec.weight(node->feature) <= node->threshold ? node->left.get()
                                                          : node->right.get();
    }
    if (node->prediction == label) ++correct;
  }
  return correct;
}

std::unique_ptr<TreeNode> clone_tree(const TreeNode& node) {
  auto copy = std::make_unique<TreeNode>();
  copy->feature = node.feature;
  copy->threshold = node.threshold;
  copy->class_counts = node.class_counts;
  copy->prediction = node.prediction;
  if (!node.is_leaf()) {
    copy->left = clone_tree(*node.left);
    copy->right = clone_tree(*node.right);
  }
  return copy;
}

ClassCounts counts_of(std::initializer_list<std::pair<PageType, std::size_t>> parts) {
  ClassCounts counts{};
  for (const auto& [type, n] : parts) counts[index_of(type)] = n;
  return counts;
}

}  // namespace

TEST_CASE("impurity reference values") {
  const ClassCounts pure = counts_of({{PageType::Staff, 7}});
  CHECK(impurity(pure, SplitCriterion::Entropy) == 0.0);
  CHECK(impurity(pure, SplitCriterion::Gini) == 0.0);

  const ClassCounts even = counts_of({{PageType::About, 5}, {PageType::Staff, 5}});
  CHECK(impurity(even, SplitCriterion::Entropy) == 1.0);
  CHECK(impurity(even, SplitCriterion::Gini) == 0.5);

  const ClassCounts skewed = counts_of({{PageType::About, 3}, {PageType::Staff, 1}});
  CHECK(std::abs(impurity(skewed, SplitCriterion::Entropy) - 0.8113) <= 1e-4);
  CHECK(impurity(skewed, SplitCriterion::Gini) == 0.375);

  CHECK_THROWS_AS(impurity(ClassCounts{}, SplitCriterion::Entropy), ConfigError);
}

TEST_CASE("impurity bounds") {
  ClassCounts uniform{};
  uniform.fill(3);
  CHECK(impurity(uniform, SplitCriterion::Entropy) == doctest::Approx(3.0));
  CHECK(impurity(uniform, SplitCriterion::Gini) == doctest::Approx(0.875));

  Rng rng = make_rng(808);
  for (int i = 0; i < 50; ++i) {
    ClassCounts counts{};
    for (auto& c : counts) c = draw_below(rng, 6);
    if (total_count(counts) == 0) counts[0] = 1;
    const double h = impurity(counts, SplitCriterion::Entropy);
    const double g = impurity(counts, SplitCriterion::Gini);
    CHECK(h >= 0.0);
    CHECK(h <= 3.0 + 1e-9);
    CHECK(g >= 0.0);
    CHECK(g <= 0.875 + 1e-9);
  }
}

TEST_CASE("majority class ties follow declaration order") {
  CHECK(majority_class(counts_of({{PageType::Staff, 2}, {PageType::About, 2}})) ==
        PageType::About);
  CHECK(majority_class(counts_of({{PageType::Study, 3}, {PageType::Staff, 3}})) ==
        PageType::Staff);
  CHECK(majority_class(counts_of({{PageType::Research, 5}, {PageType::Staff, 2}})) ==
        PageType::Research);
}

TEST_CASE("information gain on explicit partitions") {
  TrainingSet parent;
  parent.rows = {{fv({}), PageType::About},
                 {fv({}), PageType::About},
                 {fv({}), PageType::Staff},
                 {fv({}), PageType::Staff}};

  TrainingSet left;
  left.rows = {parent.rows[0], parent.rows[1]};
  TrainingSet right;
  right.rows = {parent.rows[2], parent.rows[3]};
  CHECK(information_gain(parent, {left, right}, SplitCriterion::Entropy) == 1.0);

  CHECK(information_gain(parent, {parent}, SplitCriterion::Entropy) == 0.0);

  // Pure children recover the whole parent impurity under both criteria.
  CHECK(information_gain(parent, {left, right}, SplitCriterion::Gini) == 0.5);

  TrainingSet short_side;
  short_side.rows = {parent.rows[0]};
  CHECK_THROWS_AS(information_gain(parent, {left, short_side}, SplitCriterion::Entropy),
                  ConfigError);
}

TEST_CASE("information gain never negative on random partitions") {
  Rng rng = make_rng(909);
  for (int round = 0; round < 100; ++round) {
    TrainingSet parent = random_training_set(rng, 2 + draw_below(rng, 12), 2);
    std::vector<TrainingSet> partition(1 + draw_below(rng, 3));
    for (const auto& row : parent.rows) {
      partition[draw_below(rng, partition.size())].rows.push_back(row);
    }
    for (SplitCriterion criterion :
         {SplitCriterion::Entropy, SplitCriterion::Gini}) {
      CHECK(information_gain(parent, partition, criterion) >= -1e-9);
    }
  }
}

TEST_CASE("best split on a perfectly separating binary feature") {
  TrainingSet data;
  data.rows = {{fv({{0, 1.0}}), PageType::Staff},
               {fv({{0, 1.0}}), PageType::Staff},
               {fv({}), PageType::About},
               {fv({}), PageType::About}};
  const auto split =
      best_split(data, feature_range(1), SplitCriterion::Entropy, 1e-12);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
  CHECK(split->threshold == 0.5);
  CHECK(split->gain == 1.0);
}

TEST_CASE("identical vectors admit no split") {
  TrainingSet data;
  data.rows = {{fv({{0, 1.0}}), PageType::Staff},
               {fv({{0, 1.0}}), PageType::About}};
  CHECK_FALSE(
      best_split(data, feature_range(2), SplitCriterion::Entropy, 1e-12));
}

TEST_CASE("split search equals exhaustive brute force") {
  Rng rng = make_rng(1001);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n_features = 1 + draw_below(rng, 4);
    const std::size_t n_rows = 1 + draw_below(rng, 12);
    const TrainingSet data = random_training_set(rng, n_rows, n_features);
    const auto allowed = feature_range(n_features);
    for (SplitCriterion criterion :
         {SplitCriterion::Entropy, SplitCriterion::Gini}) {
      const auto actual = best_split(data, allowed, criterion, 1e-12);
      const auto expected = oracle_best_split(data, allowed, criterion, 1e-12);
      REQUIRE(actual.has_value() == expected.has_value());
      if (actual) {
        CHECK(actual->feature == expected->feature);
        CHECK(actual->threshold == expected->threshold);
        CHECK(actual->gain == expected->gain);
      }
    }
  }
}

TEST_CASE("chosen split invariant under entropy base") {
  Rng rng = make_rng(1002);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n_features = 1 + draw_below(rng, 4);
    const std::size_t n_rows = 1 + draw_below(rng, 12);
    const TrainingSet data = random_training_set(rng, n_rows, n_features);
    const auto allowed = feature_range(n_features);

    const auto bits = best_split_with_impurity(
        data, allowed, [](const ClassCounts& c) { return oracle_entropy(c); },
        1e-12);
    const auto nats = best_split_with_impurity(
        data, allowed,
        [](const ClassCounts& c) { return oracle_entropy_nats(c); }, 1e-12);
    REQUIRE(bits.has_value() == nats.has_value());
    if (bits) {
      CHECK(bits->feature == nats->feature);
      CHECK(bits->threshold == nats->threshold);
    }
  }
}

TEST_CASE("grow base cases") {
  TreeHyperparams hp;

  TrainingSet pure;
  pure.rows = {{fv({{0, 1.0}}), PageType::Study},
               {fv({}), PageType::Study}};
  const auto leaf = grow(pure, feature_range(1), SplitCriterion::Entropy, hp);
  CHECK(leaf->is_leaf());
  CHECK(leaf->prediction == PageType::Study);

  TrainingSet single;
  single.rows = {{fv({}), PageType::Staff}};
  CHECK(grow(single, feature_range(1), SplitCriterion::Entropy, hp)->is_leaf());

  // min_leaf 2 turns 3 mixed rows into a majority leaf.
  TrainingSet tiny;
  tiny.rows = {{fv({{0, 1.0}}), PageType::Staff},
               {fv({{0, 1.0}}), PageType::Staff},
               {fv({}), PageType::About}};
  CHECK(grow(tiny, feature_range(1), SplitCriterion::Entropy, hp)->is_leaf());

  TreeHyperparams depth0;
  depth0.min_leaf = 1;
  depth0.max_depth = 0;
  TrainingSet splittable;
  splittable.rows = {{fv({{0, 1.0}}), PageType::Staff},
                     {fv({}), PageType::About}};
  CHECK(grow(splittable, feature_range(1), SplitCriterion::Entropy, depth0)
            ->is_leaf());

  CHECK_THROWS_AS(grow({}, feature_range(1), SplitCriterion::Entropy, hp),
                  ConfigError);
}

TEST_CASE("greedy growth resolves xor in two levels") {
  // Neither feature helps alone (every first-level gain is 0), so zero-gain
  // splits must be admissible for this dataset: min_gain below 0 lets the
  // tie-break pick feature 0 and the second level finishes the job.
  TrainingSet data;
  for (int copy = 0; copy < 2; ++copy) {
    data.rows.push_back({fv({}), PageType::About});
    data.rows.push_back({fv({{0, 1.0}, {1, 1.0}}), PageType::About});
    data.rows.push_back({fv({{1, 1.0}}), PageType::Staff});
    data.rows.push_back({fv({{0, 1.0}}), PageType::Staff});
  }
  TreeHyperparams hp;
  hp.min_leaf = 1;
  hp.min_gain = -1.0;
  const auto root = grow(data, feature_range(2), SplitCriterion::Entropy, hp);
  REQUIRE_FALSE(root->is_leaf());
  CHECK(root->feature == 0);
  CHECK(tree_depth(*root) == 2);
  CHECK(correct_on(*root, data) == data.size());
}

TEST_CASE("perfect fit on consistent data") {
  Rng rng = make_rng(1103);
  for (int round = 0; round < 20; ++round) {
    // Labels derive from the vector content, so equal vectors agree.
    TrainingSet data = random_training_set(rng, 4 + draw_below(rng, 12), 3);
    for (auto& [vec, label] : data.rows) {
      const int bucket = static_cast<int>(vec.weight(0) * 2 + vec.weight(1)) %
                         static_cast<int>(kPageTypeCount);
      label = static_cast<PageType>(bucket);
    }
    TreeHyperparams hp;
    hp.min_leaf = 1;
    hp.min_gain = -1.0;
    const auto root = grow(data, feature_range(3), SplitCriterion::Entropy, hp);
    CHECK(correct_on(*root, data) == data.size());
  }
}

TEST_CASE("grow is deterministic") {
  Rng rng_a = make_rng(1104);
  Rng rng_b = make_rng(1104);
  const TrainingSet a = random_training_set(rng_a, 14, 4);
  const TrainingSet b = random_training_set(rng_b, 14, 4);
  TreeHyperparams hp;
  hp.min_leaf = 1;

  DecisionTreeModel model_a;
  model_a.root = grow(a, feature_range(4), SplitCriterion::Entropy, hp);
  DecisionTreeModel model_b;
  model_b.root = grow(b, feature_range(4), SplitCriterion::Entropy, hp);
  for (auto* model : {&model_a, &model_b}) {
    model->vocab_size = 4;
    model->feature_terms = {"t0", "t1", "t2", "t3"};
  }
  CHECK(export_text(model_a) == export_text(model_b));
}

TEST_CASE("pruning leaves a lone leaf alone") {
  auto leaf = std::make_unique<TreeNode>();
  leaf->class_counts = counts_of({{PageType::Staff, 3}});
  leaf->prediction = PageType::Staff;

  TrainingSet validation;
  validation.rows = {{fv({}), PageType::About}};
  const auto pruned = prune(std::move(leaf), validation);
  CHECK(pruned->is_leaf());
  CHECK(pruned->prediction == PageType::Staff);
}

TEST_CASE("prediction-equivalent subtree collapses") {
  auto root = std::make_unique<TreeNode>();
  root->feature = 0;
  root->threshold = 0.5;
  root->class_counts = counts_of({{PageType::About, 3}});
  root->prediction = PageType::About;
  root->left = std::make_unique<TreeNode>();
  root->left->class_counts = counts_of({{PageType::About, 2}});
  root->left->prediction = PageType::About;
  root->right = std::make_unique<TreeNode>();
  root->right->class_counts = counts_of({{PageType::About, 1}});
  root->right->prediction = PageType::About;

  TrainingSet validation;
  validation.rows = {{fv({{0, 1.0}}), PageType::About}};
  const auto pruned = prune(std::move(root), validation);
  CHECK(pruned->is_leaf());
  CHECK(pruned->prediction == PageType::About);
}

TEST_CASE("pruning contract on random trees") {
  Rng rng = make_rng(1205);
  for (int round = 0; round < 40; ++round) {
    TreeHyperparams hp;
    hp.min_leaf = 1;
    const TrainingSet train = random_training_set(rng, 6 + draw_below(rng, 20), 3);
    const TrainingSet validation =
        random_training_set(rng, 1 + draw_below(rng, 10), 3);
    auto grown = grow(train, feature_range(3), SplitCriterion::Entropy, hp);
    const auto before = clone_tree(*grown);

    const auto pruned = prune(std::move(grown), validation);
    CHECK(count_nodes(*pruned) <= count_nodes(*before));
    CHECK(correct_on(*pruned, validation) >= correct_on(*before, validation));
  }

  auto leaf = std::make_unique<TreeNode>();
  leaf->class_counts = counts_of({{PageType::About, 1}});
  CHECK_THROWS_AS(prune(std::move(leaf), TrainingSet{}), ConfigError);
}

TEST_CASE("prediction walks thresholds") {
  DecisionTreeModel model;
  model.vocab_size = 2;
  model.feature_terms = {"alpha", "beta"};
  model.root = std::make_unique<TreeNode>();
  model.root->feature = 0;
  model.root->threshold = 0.5;
  model.root->class_counts = counts_of({{PageType::About, 2}, {PageType::Staff, 2}});
  model.root->prediction = PageType::About;
  model.root->left = std::make_unique<TreeNode>();
  model.root->left->class_counts = counts_of({{PageType::About, 2}});
  model.root->left->prediction = PageType::About;
  model.root->right = std::make_unique<TreeNode>();
  model.root->right->class_counts = counts_of({{PageType::Staff, 2}});
  model.root->right->prediction = PageType::Staff;

  CHECK(predict(model, fv({})) == PageType::About);  // absent weighs 0
  CHECK(predict(model, fv({{0, 1.0}})) == PageType::Staff);
  CHECK(predict(model, fv({{0, 0.5}})) == PageType::About);  // <= goes left
  CHECK(predict(model, fv({{1, 9.0}})) == PageType::About);
  CHECK_THROWS_AS(predict(model, fv({{5, 1.0}})), RuntimeError);

  DecisionTreeModel single;
  single.vocab_size = 1;
  single.root = std::make_unique<TreeNode>();
  single.root->class_counts = counts_of({{PageType::Study, 4}});
  single.root->prediction = PageType::Study;
  CHECK(predict(single, fv({})) == PageType::Study);
  CHECK(predict(single, fv({{0, 3.0}})) == PageType::Study);
}

TEST_CASE("used features collects internal ids") {
  DecisionTreeModel model;
  model.vocab_size = 20;
  model.root = std::make_unique<TreeNode>();
  model.root->feature = 3;
  model.root->threshold = 0.5;
  model.root->left = std::make_unique<TreeNode>();
  model.root->left->prediction = PageType::About;
  model.root->right = std::make_unique<TreeNode>();
  model.root->right->feature = 17;
  model.root->right->threshold = 1.5;
  model.root->right->left = std::make_unique<TreeNode>();
  model.root->right->right = std::make_unique<TreeNode>();

  CHECK(used_features(*model.root) == std::set<FeatureId>{3, 17});
  CHECK(restrict_to_used_features(model) == std::set<FeatureId>{3, 17});

  const TreeNode lone;
  CHECK(used_features(lone).empty());
}

TEST_CASE("export one line per node") {
  DecisionTreeModel leaf_model;
  leaf_model.vocab_size = 0;
  leaf_model.root = std::make_unique<TreeNode>();
  leaf_model.root->class_counts = counts_of({{PageType::Research, 5}});
  leaf_model.root->prediction = PageType::Research;
  CHECK(export_text(leaf_model) == "-> Research (5)\n");

  DecisionTreeModel model;
  model.vocab_size = 1;
  model.feature_terms = {"staff"};
  model.root = std::make_unique<TreeNode>();
  model.root->feature = 0;
  model.root->threshold = 0.5;
  model.root->class_counts =
      counts_of({{PageType::About, 2}, {PageType::Staff, 3}});
  model.root->prediction = PageType::Staff;
  model.root->left = std::make_unique<TreeNode>();
  model.root->left->class_counts = counts_of({{PageType::About, 2}});
  model.root->left->prediction = PageType::About;
  model.root->right = std::make_unique<TreeNode>();
  model.root->right->class_counts = counts_of({{PageType::Staff, 3}});
  model.root->right->prediction = PageType::Staff;

  CHECK(export_text(model) ==
        "staff <= 0.5\n"
        "  -> About (2)\n"
        "  -> Staff (3)\n");
}

TEST_CASE("export import round trip") {
  Rng rng = make_rng(1306);
  const TrainingSet data = random_training_set(rng, 16, 3);
  const Vocabulary vocab = build_vocabulary({{"one", "two", "three"}});

  TreeHyperparams hp;
  hp.min_leaf = 1;
  DecisionTreeModel model;
  model.root = grow(data, feature_range(3), SplitCriterion::Entropy, hp);
  model.vocab_size = vocab.size();
  model.feature_terms = vocab.terms;
  model.vocab_checksum = vocab.checksum();
  model.hyperparams = hp;

  const std::string text = export_text(model);
  const DecisionTreeModel imported = import_text(text, vocab);
  CHECK(export_text(imported) == text);

  // Predict-equivalence over a grid of vectors.
  for (double w0 : {0.0, 0.5, 1.0}) {
    for (double w1 : {0.0, 0.5, 1.0}) {
      for (double w2 : {0.0, 0.5, 1.0}) {
        const FeatureVector probe = fv({{0, w0}, {1, w1}, {2, w2}});
        CHECK(predict(model, probe) == predict(imported, probe));
      }
    }
  }

  CHECK_THROWS_AS(import_text("", vocab), RuntimeError);
  CHECK_THROWS_AS(import_text("unknownterm <= 0.5\n  -> About (1)\n  -> Staff (1)\n",
                              vocab),
                  RuntimeError);
}

TEST_CASE("model file round trip and vocabulary guard") {
  TempDir dir("dtree");
  Rng rng = make_rng(1407);
  const TrainingSet data = random_training_set(rng, 20, 3);
  const Vocabulary vocab = build_vocabulary({{"apple", "pear", "plum"}});

  TreeHyperparams hp;
  hp.min_leaf = 1;
  DecisionTreeModel model;
  model.root = grow(data, feature_range(3), SplitCriterion::Entropy, hp);
  model.criterion = SplitCriterion::Entropy;
  model.vocab_size = vocab.size();
  model.feature_terms = vocab.terms;
  model.vocab_checksum = vocab.checksum();
  model.hyperparams = hp;

  const auto path = dir.path / "model.txt";
  save_model(model, path);
  const std::string first = read_file(path);
  CHECK(first.rfind("unilink decision tree v1\n", 0) == 0);

  const DecisionTreeModel loaded = load_model(path, vocab);
  CHECK(loaded.vocab_size == model.vocab_size);
  CHECK(loaded.criterion == model.criterion);
  CHECK(loaded.hyperparams.min_leaf == hp.min_leaf);
  CHECK(export_text(loaded) == export_text(model));

  const auto again = dir.path / "model2.txt";
  save_model(loaded, again);
  CHECK(read_file(again) == first);

  const Vocabulary other = build_vocabulary({{"apple", "pear", "plum"}, {"apple"}});
  CHECK_THROWS_AS(load_model(path, other), RuntimeError);
}
