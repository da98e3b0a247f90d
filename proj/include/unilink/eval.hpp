#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unilink/corpus.hpp"
#include "unilink/dtree.hpp"
#include "unilink/pipeline.hpp"
#include "unilink/page_type.hpp"

namespace unilink {

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kPageTypeCount>, kPageTypeCount> counts{};

  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(PageType type) const;
  std::size_t col_sum(PageType type) const;
};

// A missing value marks an undefined metric (zero denominator); tables render
// it as a flagged 0.00.
struct ClassMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f_measure;
};

struct EvalReport {
  ConfusionMatrix matrix;
  double accuracy = 0.0;
  std::array<ClassMetrics, kPageTypeCount> per_class{};
};

// Accuracy reported for the default configuration on the original survey
// data; kept for documentation and report footnotes, never asserted.
inline constexpr double kReferenceTrainingAccuracy = 72.13;
inline constexpr double kReferenceVerificationAccuracy = 71.25;

ConfusionMatrix confusion(
    const std::vector<std::pair<PageType, PageType>>& pairs);

// One-vs-rest precision/recall/F per class plus micro accuracy (trace/total).
EvalReport metrics(const ConfusionMatrix& matrix);

// Seeded shuffle, round-robin fold assignment, full training pipeline re-run
// per fold (vocabulary and feature selection included); the report pools all
// N predictions. k = N gives leave-one-out.
EvalReport cross_validate(const std::vector<LabeledDocument>& documents,
                          const StopList& stoplist, const TrainOptions& options,
                          std::size_t k, std::uint64_t seed);

// Held-out evaluation with training-time artifacts only. Rejects a vocabulary
// whose checksum differs from the model's.
EvalReport verify(const DecisionTreeModel& model, const Vocabulary& vocab,
                  const std::vector<LabeledDocument>& test,
                  const PipelineConfig& config, const StopList& stoplist,
                  WeightingScheme weighting);

// Structured text: class legend, confusion matrix, per-class table with two
// decimals (undefined metrics as "0.00*"), accuracy percentage.
std::string format_report(const EvalReport& report);

}  // namespace unilink
