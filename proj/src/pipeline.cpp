#include "unilink/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "unilink/errors.hpp"
#include "unilink/rng.hpp"

namespace unilink {

namespace {

struct GrowValidationSplit {
  std::vector<std::size_t> grow;        // original row indices, ascending
  std::vector<std::size_t> validation;  // original row indices, ascending
};

GrowValidationSplit holdout_split(std::size_t n, double fraction,
                                  std::uint64_t seed) {
  const auto grow_count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n) + 0.5));
  if (grow_count == 0 || grow_count >= n) {
    throw ConfigError(
        "too few rows to hold out a pruning set; train on more documents or "
        "disable pruning");
  }
  const std::vector<std::size_t> order = shuffled_indices(n, seed);
  GrowValidationSplit split;
  split.grow.assign(order.begin(), order.begin() + grow_count);
  split.validation.assign(order.begin() + grow_count, order.end());
  std::sort(split.grow.begin(), split.grow.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

TrainingSet gather(const std::vector<LabeledVector>& rows,
                   const std::vector<std::size_t>& indices) {
  TrainingSet set;
  set.rows.reserve(indices.size());
  for (std::size_t i : indices) set.rows.push_back(rows[i]);
  return set;
}

}  // namespace

FeatureVector vectorize_document(const Document& document,
                                 const PipelineConfig& config,
                                 const StopList& stoplist,
                                 const Vocabulary& vocab,
                                 WeightingScheme weighting) {
  return vectorize(preprocess(document, config, stoplist), vocab, weighting);
}

PageType classify_document(const Document& document,
                           const DecisionTreeModel& model,
                           const Vocabulary& vocab,
                           const PipelineConfig& config,
                           const StopList& stoplist,
                           WeightingScheme weighting) {
  if (model.vocab_checksum != vocab.checksum()) {
    throw RuntimeError(
        "vocabulary mismatch: the model was trained against a different "
        "vocabulary");
  }
  return predict(model,
                 vectorize_document(document, config, stoplist, vocab,
                                    weighting));
}

TrainedPipeline train_pipeline(const std::vector<LabeledDocument>& train,
                               const StopList& stoplist,
                               const TrainOptions& options) {
  if (train.empty()) throw ConfigError("no training documents");
  if (!options.pipeline.valid()) {
    throw ConfigError("at least one of title and URL must feed the pipeline");
  }
  if (options.feature_k == 0) throw ConfigError("feature_k must be >= 1");

  std::vector<std::vector<std::string>> term_lists;
  term_lists.reserve(train.size());
  for (const auto& doc : train) {
    term_lists.push_back(preprocess(doc.document, options.pipeline, stoplist));
  }
  Vocabulary vocab = build_vocabulary(term_lists);

  std::vector<LabeledVector> rows;
  rows.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    rows.emplace_back(vectorize(term_lists[i], vocab, options.weighting),
                      train[i].label);
  }

  const auto ranking = information_gain_rank(rows, vocab);
  const std::set<FeatureId> selected =
      select_top_k(ranking, options.feature_k);

  TrainingSet grow_set;
  TrainingSet validation_set;
  if (options.prune) {
    const auto split =
        holdout_split(rows.size(), options.grow_fraction, options.seed);
    grow_set = gather(rows, split.grow);
    validation_set = gather(rows, split.validation);
  } else {
    grow_set.rows = rows;
  }

  auto build = [&](const std::set<FeatureId>& allowed) {
    auto root = grow(grow_set, allowed, options.criterion, options.tree);
    if (options.prune) root = prune(std::move(root), validation_set);
    return root;
  };

  TrainedPipeline result;
  result.model.root = build(selected);
  if (options.restrict_retrain) {
    const std::set<FeatureId> used = used_features(*result.model.root);
    if (!used.empty() && used.size() < selected.size()) {
      result.model.root = build(used);
    }
  }

  result.model.criterion = options.criterion;
  result.model.vocab_size = vocab.size();
  result.model.hyperparams = options.tree;
  result.model.vocab_checksum = vocab.checksum();
  result.model.feature_terms = vocab.terms;
  result.vocabulary = std::move(vocab);
  result.selected_features.reserve(selected.size());
  for (const auto& [id, gain] : ranking) {
    if (selected.count(id)) result.selected_features.push_back(id);
  }
  return result;
}

}  // namespace unilink
