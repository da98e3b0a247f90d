#include "unilink/dtree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "unilink/errors.hpp"

namespace unilink {

namespace {

// Gains are compared between this implementation and independent oracles in
// tests, so the arithmetic keeps one fixed shape: impurities sum over classes
// in declaration order and the weighted child term is (nl*Il + nr*Ir) / n.
double entropy_bits(const ClassCounts& counts, std::size_t total) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double gini_index(const ClassCounts& counts, std::size_t total) {
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, const char* what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw RuntimeError(std::string("bad ") + what + " '" + std::string(text) +
                       "'");
  }
  return value;
}

}  // namespace

PageType majority_class(const ClassCounts& counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return static_cast<PageType>(best);
}

std::string_view criterion_name(SplitCriterion criterion) {
  return criterion == SplitCriterion::Entropy ? "entropy" : "gini";
}

std::optional<SplitCriterion> parse_criterion(std::string_view name) {
  if (name == "entropy") return SplitCriterion::Entropy;
  if (name == "gini") return SplitCriterion::Gini;
  return std::nullopt;
}

ClassCounts TrainingSet::class_counts() const {
  ClassCounts counts{};
  for (const auto& [vec, label] : rows) ++counts[index_of(label)];
  return counts;
}

double impurity(const ClassCounts& counts, SplitCriterion criterion) {
  const std::size_t total = total_count(counts);
  if (total == 0) throw ConfigError("impurity of an empty distribution");
  return criterion == SplitCriterion::Entropy ? entropy_bits(counts, total)
                                              : gini_index(counts, total);
}

double information_gain(const TrainingSet& parent,
                        const std::vector<TrainingSet>& partition,
                        SplitCriterion criterion) {
  std::size_t covered = 0;
  for (const auto& subset : partition) covered += subset.size();
  if (covered != parent.size()) {
    throw ConfigError("partition sizes do not sum to the parent size");
  }
  const double parent_impurity = impurity(parent.class_counts(), criterion);
  double weighted = 0.0;
  for (const auto& subset : partition) {
    if (subset.size() == 0) continue;
    weighted += static_cast<double>(subset.size()) *
                impurity(subset.class_counts(), criterion);
  }
  return parent_impurity - weighted / static_cast<double>(parent.size());
}

// Far below any gain difference the candidate arithmetic can produce on
// purpose, far above the rounding noise of evaluating one tied gain two ways.
constexpr double kGainTieGap = 1e-9;

std::optional<SplitChoice> best_split_with_impurity(
    const TrainingSet& data, const std::set<FeatureId>& allowed,
    const ImpurityFn& impurity_fn, double min_gain) {
  const std::size_t n = data.size();
  if (n == 0) throw ConfigError("cannot split an empty training set");
  const ClassCounts parent_counts = data.class_counts();
  const double parent_impurity = impurity_fn(parent_counts);

  std::optional<SplitChoice> best;
  std::vector<std::pair<double, PageType>> column(n);
  for (FeatureId feature : allowed) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = {data.rows[i].first.weight(feature), data.rows[i].second};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Sweep sorted weights; at each boundary between distinct values, the
    // midpoint is a candidate and the running counts give the left side.
    ClassCounts left{};
    std::size_t n_left = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[index_of(column[i].second)];
      ++n_left;
      if (column[i].first == column[i + 1].first) continue;
      const double threshold = (column[i].first + column[i + 1].first) / 2.0;
      ClassCounts right{};
      for (std::size_t c = 0; c < kPageTypeCount; ++c) {
        right[c] = parent_counts[c] - left[c];
      }
      const std::size_t n_right = n - n_left;
      const double child_term =
          static_cast<double>(n_left) * impurity_fn(left) +
          static_cast<double>(n_right) * impurity_fn(right);
      const double gain = parent_impurity - child_term / static_cast<double>(n);
      // Gains within kGainTieGap of the incumbent count as ties, so the
      // earliest candidate in (feature, threshold) order keeps winning. A
      // plain > would let last-ulp rounding (for example between log bases)
      // flip mathematically tied candidates.
      if (!best || gain > best->gain + kGainTieGap) {
        best = SplitChoice{feature, threshold, gain};
      }
    }
  }
  if (best && best->gain <= min_gain) return std::nullopt;
  return best;
}

std::optional<SplitChoice> best_split(const TrainingSet& data,
                                      const std::set<FeatureId>& allowed,
                                      SplitCriterion criterion,
                                      double min_gain) {
  if (criterion == SplitCriterion::Entropy) {
    return best_split_with_impurity(
        data, allowed,
        [](const ClassCounts& c) { return entropy_bits(c, total_count(c)); },
        min_gain);
  }
  return best_split_with_impurity(
      data, allowed,
      [](const ClassCounts& c) { return gini_index(c, total_count(c)); },
      min_gain);
}

namespace {

std::unique_ptr<TreeNode> make_leaf(ClassCounts counts) {
  auto node = std::make_unique<TreeNode>();
  node->class_counts = counts;
  node->prediction = majority_class(counts);
  return node;
}

std::unique_ptr<TreeNode> grow_rec(const TrainingSet& data,
                                   const std::set<FeatureId>& allowed,
                                   SplitCriterion criterion,
                                   const TreeHyperparams& hp,
                                   std::size_t depth) {
  const ClassCounts counts = data.class_counts();
  const std::size_t total = data.size();
  const bool pure =
      *std::max_element(counts.begin(), counts.end()) == total;
  if (pure || total < 2 * hp.min_leaf ||
      (hp.max_depth && depth >= *hp.max_depth)) {
    return make_leaf(counts);
  }
  auto split = best_split(data, allowed, criterion, hp.min_gain);
  if (!split) return make_leaf(counts);

  TrainingSet left_data;
  TrainingSet right_data;
  for (const auto& row : data.rows) {
    if (row.first.weight(split->feature) <= split->threshold) {
      left_data.rows.push_back(row);
    } else {
      right_data.rows.push_back(row);
    }
  }
  auto node = std::make_unique<TreeNode>();
  node->feature = split->feature;
  node->threshold = split->threshold;
  node->class_counts = counts;
  node->prediction = majority_class(counts);
  node->left = grow_rec(left_data, allowed, criterion, hp, depth + 1);
  node->right = grow_rec(right_data, allowed, criterion, hp, depth + 1);
  return node;
}

// Validation rows routed to `node`; returns the error count of the
// (already-pruned) subtree on those rows, collapsing the node whenever a
// majority leaf would do at least as well.
std::size_t prune_rec(TreeNode* node,
                      const std::vector<const LabeledVector*>& rows,
                      bool& changed) {
  const PageType majority = majority_class(node->class_counts);
  std::size_t errors_as_leaf = 0;
  for (const auto* row : rows) {
    if (row->second != majority) ++errors_as_leaf;
  }
  if (node->is_leaf()) return errors_as_leaf;

  std::vector<const LabeledVector*> left_rows;
  std::vector<const LabeledVector*> right_rows;
  for (const auto* row : rows) {
    if (row->first.weight(node->feature) <= node->threshold) {
      left_rows.push_back(row);
    } else {
      right_rows.push_back(row);
    }
  }
  const std::size_t subtree_errors =
      prune_rec(node->left.get(), left_rows, changed) +
      prune_rec(node->right.get(), right_rows, changed);
  if (errors_as_leaf <= subtree_errors) {
    node->left.reset();
    node->right.reset();
    node->feature = -1;
    node->threshold = 0.0;
    node->prediction = majority;
    changed = true;
    return errors_as_leaf;
  }
  return subtree_errors;
}

}  // namespace

std::unique_ptr<TreeNode> grow(const TrainingSet& data,
                               const std::set<FeatureId>& allowed,
                               SplitCriterion criterion,
                               const TreeHyperparams& hyperparams) {
  if (data.size() == 0) throw ConfigError("cannot grow a tree from no rows");
  return grow_rec(data, allowed, criterion, hyperparams, 0);
}

std::unique_ptr<TreeNode> prune(std::unique_ptr<TreeNode> root,
                                const TrainingSet& validation) {
  if (validation.size() == 0) {
    throw ConfigError("pruning needs a non-empty validation set");
  }
  std::vector<const LabeledVector*> rows;
  rows.reserve(validation.size());
  for (const auto& row : validation.rows) rows.push_back(&row);
  bool changed = true;
  while (changed) {
    changed = false;
    prune_rec(root.get(), rows, changed);
  }
  return root;
}

std::size_t count_nodes(const TreeNode& node) {
  if (node.is_leaf()) return 1;
  return 1 + count_nodes(*node.left) + count_nodes(*node.right);
}

std::size_t tree_depth(const TreeNode& node) {
  if (node.is_leaf()) return 0;
  return 1 + std::max(tree_depth(*node.left), tree_depth(*node.right));
}

PageType predict(const DecisionTreeModel& model, const FeatureVector& vector) {
  for (const auto& [id, weight] : vector.entries) {
    if (id < 0 || static_cast<std::size_t>(id) >= model.vocab_size) {
      throw RuntimeError("feature id " + std::to_string(id) +
                         " out of range for vocabulary of size " +
                         std::to_string(model.vocab_size));
    }
  }
  const TreeNode* node = model.root.get();
  while (!node->is_leaf()) {
    node = vector.weight(node->feature) <= node->threshold ? node->left.get()
                                                           : node->right.get();
  }
  return node->prediction;
}

namespace {

void collect_used(const TreeNode& node, std::set<FeatureId>& used) {
  if (node.is_leaf()) return;
  used.insert(node.feature);
  collect_used(*node.left, used);
  collect_used(*node.right, used);
}

void export_node(const TreeNode& node, const DecisionTreeModel& model,
                 std::size_t depth, std::string& out) {
  out.append(2 * depth, ' ');
  if (node.is_leaf()) {
    out += "-> ";
    out += to_label(node.prediction);
    out += " (" + std::to_string(total_count(node.class_counts)) + ")\n";
    return;
  }
  const auto id = static_cast<std::size_t>(node.feature);
  if (id >= model.feature_terms.size() || model.feature_terms[id].empty()) {
    throw RuntimeError("no term recorded for feature id " +
                       std::to_string(node.feature));
  }
  out += model.feature_terms[id];
  out += " <= ";
  out += format_double(node.threshold);
  out += '\n';
  export_node(*node.left, model, depth + 1, out);
  export_node(*node.right, model, depth + 1, out);
}

struct TreeParser {
  std::vector<std::pair<std::size_t, std::string>> lines;  // (depth, body)
  std::size_t pos = 0;
  const Vocabulary* vocab = nullptr;

  std::unique_ptr<TreeNode> parse_node(std::size_t depth) {
    if (pos >= lines.size() || lines[pos].first != depth) {
      throw RuntimeError("tree text: expected a node at depth " +
                         std::to_string(depth));
    }
    const std::string body = lines[pos].second;
    ++pos;
    auto node = std::make_unique<TreeNode>();
    if (body.rfind("-> ", 0) == 0) {
      auto open = body.rfind(" (");
      if (open == std::string::npos || body.back() != ')') {
        throw RuntimeError("tree text: malformed leaf '" + body + "'");
      }
      const std::string label = body.substr(3, open - 3);
      auto type = parse_page_type(label);
      if (!type) {
        throw RuntimeError("tree text: unknown class '" + label + "'");
      }
      const std::string count_text =
          body.substr(open + 2, body.size() - open - 3);
      node->prediction = *type;
      node->class_counts[index_of(*type)] = static_cast<std::size_t>(
          parse_double(count_text, "leaf count"));
      return node;
    }
    const auto cmp = body.find(" <= ");
    if (cmp == std::string::npos) {
      throw RuntimeError("tree text: malformed split '" + body + "'");
    }
    const std::string term = body.substr(0, cmp);
    auto it = vocab->index.find(term);
    if (it == vocab->index.end()) {
      throw RuntimeError("tree text: term '" + term +
                         "' is not in the vocabulary");
    }
    node->feature = it->second;
    node->threshold = parse_double(body.substr(cmp + 4), "threshold");
    node->left = parse_node(depth + 1);
    node->right = parse_node(depth + 1);
    // Internal counts are the sum of what reaches the leaves below.
    for (std::size_t c = 0; c < kPageTypeCount; ++c) {
      node->class_counts[c] =
          node->left->class_counts[c] + node->right->class_counts[c];
    }
    node->prediction = majority_class(node->class_counts);
    return node;
  }
};

}  // namespace

std::set<FeatureId> used_features(const TreeNode& root) {
  std::set<FeatureId> used;
  collect_used(root, used);
  return used;
}

std::set<FeatureId> restrict_to_used_features(const DecisionTreeModel& model) {
  return used_features(*model.root);
}

std::string export_text(const DecisionTreeModel& model) {
  std::string out;
  export_node(*model.root, model, 0, out);
  return out;
}

DecisionTreeModel import_text(const std::string& text,
                              const Vocabulary& vocab) {
  DecisionTreeModel model;
  TreeParser parser;
  parser.vocab = &vocab;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t indent = 0;
    while (indent < line.size() && line[indent] == ' ') ++indent;
    if (indent % 2 != 0) {
      throw RuntimeError("tree text: odd indentation");
    }
    parser.lines.emplace_back(indent / 2, line.substr(indent));
  }
  if (parser.lines.empty()) throw RuntimeError("tree text: empty input");
  model.root = parser.parse_node(0);
  if (parser.pos != parser.lines.size()) {
    throw RuntimeError("tree text: trailing lines after the root subtree");
  }
  model.vocab_size = vocab.terms.size();
  model.feature_terms = vocab.terms;
  model.vocab_checksum = vocab.checksum();
  return model;
}

void save_model(const DecisionTreeModel& model,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write model " + path.string());
  out << "unilink decision tree v1\n";
  out << "criterion = " << criterion_name(model.criterion) << "\n";
  out << "min_leaf = " << model.hyperparams.min_leaf << "\n";
  out << "min_gain = " << format_double(model.hyperparams.min_gain) << "\n";
  out << "max_depth = ";
  if (model.hyperparams.max_depth) {
    out << *model.hyperparams.max_depth;
  } else {
    out << "none";
  }
  out << "\n";
  out << "vocab_size = " << model.vocab_size << "\n";
  out << "vocab_checksum = " << model.vocab_checksum << "\n";
  out << "tree\n";
  out << export_text(model);
}

DecisionTreeModel load_model(const std::filesystem::path& path,
                             const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open model " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "unilink decision tree v1") {
    throw RuntimeError(path.string() + ": not a unilink model file");
  }
  std::string criterion_text;
  std::string min_gain_text;
  std::string max_depth_text;
  std::size_t min_leaf = 2;
  std::size_t vocab_size = 0;
  std::string checksum;
  while (std::getline(in, line)) {
    if (line == "tree") break;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      throw RuntimeError(path.string() + ": malformed header line '" + line +
                         "'");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (key == "criterion") {
      criterion_text = value;
    } else if (key == "min_leaf") {
      min_leaf = std::stoull(value);
    } else if (key == "min_gain") {
      min_gain_text = value;
    } else if (key == "max_depth") {
      max_depth_text = value;
    } else if (key == "vocab_size") {
      vocab_size = std::stoull(value);
    } else if (key == "vocab_checksum") {
      checksum = value;
    } else {
      throw RuntimeError(path.string() + ": unknown header key '" + key + "'");
    }
  }
  if (vocab_size != vocab.terms.size() || checksum != vocab.checksum()) {
    throw RuntimeError(path.string() +
                       ": vocabulary mismatch (model was saved against a "
                       "different vocabulary)");
  }
  std::ostringstream tree_text;
  tree_text << in.rdbuf();
  DecisionTreeModel model = import_text(tree_text.str(), vocab);
  auto criterion = parse_criterion(criterion_text);
  if (!criterion) {
    throw RuntimeError(path.string() + ": unknown criterion '" +
                       criterion_text + "'");
  }
  model.criterion = *criterion;
  model.hyperparams.min_leaf = min_leaf;
  if (!min_gain_text.empty()) {
    model.hyperparams.min_gain = parse_double(min_gain_text, "min_gain");
  }
  if (max_depth_text != "none" && !max_depth_text.empty()) {
    model.hyperparams.max_depth = std::stoull(max_depth_text);
  }
  return model;
}

}  // namespace unilink
