#pragma once

#include <cstdint>
#include <vector>

#include "unilink/corpus.hpp"
#include "unilink/dtree.hpp"
#include "unilink/textprep.hpp"
#include "unilink/vectorize.hpp"

namespace unilink {

// Everything a training run needs beyond the documents themselves. The same
// options drive cmd_train and each cross-validation fold.
struct TrainOptions {
  PipelineConfig pipeline;
  WeightingScheme weighting = WeightingScheme::TF;
  std::size_t feature_k = 250;
  SplitCriterion criterion = SplitCriterion::Entropy;
  TreeHyperparams tree;
  bool prune = true;
  // Share of the training rows the tree grows on; the remainder is the
  // pruning holdout (round-half-up, seeded shuffle).
  double grow_fraction = 2.0 / 3.0;
  // Repeat growth restricted to the features the pruned tree actually used.
  bool restrict_retrain = true;
  std::uint64_t seed = 7;
};

struct TrainedPipeline {
  DecisionTreeModel model;
  Vocabulary vocabulary;
  // Ids that survived information-gain selection, best first.
  std::vector<FeatureId> selected_features;
};

// preprocess -> vocabulary -> vectors -> information-gain top-k -> grow ->
// prune -> optional restricted regrow. Vocabulary and feature selection use
// every supplied document; the pruning holdout is carved out afterwards.
TrainedPipeline train_pipeline(const std::vector<LabeledDocument>& train,
                               const StopList& stoplist,
                               const TrainOptions& options);

// One unlabeled document through the trained artifacts.
FeatureVector vectorize_document(const Document& document,
                                 const PipelineConfig& config,
                                 const StopList& stoplist,
                                 const Vocabulary& vocab,
                                 WeightingScheme weighting);

PageType classify_document(const Document& document,
                           const DecisionTreeModel& model,
                           const Vocabulary& vocab,
                           const PipelineConfig& config,
                           const StopList& stoplist,
                           WeightingScheme weighting);

}  // namespace unilink
