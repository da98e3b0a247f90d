#include "unilink/eval.hpp"

#include <cstdio>

#include "unilink/errors.hpp"
#include "unilink/rng.hpp"

namespace unilink {

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (const auto& row : counts) {
    for (std::size_t c : row) sum += c;
  }
  return sum;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t sum = 0;
  for (std::size_t i = 0; i < kPageTypeCount; ++i) sum += counts[i][i];
  return sum;
}

std::size_t ConfusionMatrix::row_sum(PageType type) const {
  std::size_t sum = 0;
  for (std::size_t c : counts[index_of(type)]) sum += c;
  return sum;
}

std::size_t ConfusionMatrix::col_sum(PageType type) const {
  std::size_t sum = 0;
  for (const auto& row : counts) sum += row[index_of(type)];
  return sum;
}

ConfusionMatrix confusion(
    const std::vector<std::pair<PageType, PageType>>& pairs) {
  if (pairs.empty()) throw ConfigError("no (true, predicted) pairs to count");
  ConfusionMatrix matrix;
  for (const auto& [truth, predicted] : pairs) {
    ++matrix.counts[index_of(truth)][index_of(predicted)];
  }
  return matrix;
}

EvalReport metrics(const ConfusionMatrix& matrix) {
  const std::size_t total = matrix.total();
  if (total == 0) throw ConfigError("empty confusion matrix");
  EvalReport report;
  report.matrix = matrix;
  report.accuracy =
      static_cast<double>(matrix.trace()) / static_cast<double>(total);
  for (PageType type : all_page_types()) {
    const std::size_t i = index_of(type);
    const std::size_t tp = matrix.counts[i][i];
    const std::size_t predicted = matrix.col_sum(type);  // TP + FP
    const std::size_t actual = matrix.row_sum(type);     // TP + FN
    ClassMetrics& m = report.per_class[i];
    if (predicted > 0) {
      m.precision =
          static_cast<double>(tp) / static_cast<double>(predicted);
    }
    if (actual > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(actual);
    }
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
      m.f_measure =
          2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
  }
  return report;
}

EvalReport cross_validate(const std::vector<LabeledDocument>& documents,
                          const StopList& stoplist, const TrainOptions& options,
                          std::size_t k, std::uint64_t seed) {
  const std::size_t n = documents.size();
  if (k < 2) throw ConfigError("cross-validation needs k >= 2");
  if (n < k) {
    throw ConfigError("cross-validation needs at least k documents (k = " +
                      std::to_string(k) + ", have " + std::to_string(n) + ")");
  }
  // Seeded shuffle, then fold f collects every k-th shuffled position.
  const std::vector<std::size_t> order = shuffled_indices(n, seed);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold_of[order[pos]] = pos % k;

  std::vector<std::pair<PageType, PageType>> pooled;
  pooled.reserve(n);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<LabeledDocument> train;
    std::vector<const LabeledDocument*> held_out;
    train.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == f) {
        held_out.push_back(&documents[i]);
      } else {
        train.push_back(documents[i]);
      }
    }
    const TrainedPipeline trained = train_pipeline(train, stoplist, options);
    for (const auto* doc : held_out) {
      const PageType predicted = classify_document(
          doc->document, trained.model, trained.vocabulary, options.pipeline,
          stoplist, options.weighting);
      pooled.emplace_back(doc->label, predicted);
    }
  }
  return metrics(confusion(pooled));
}

EvalReport verify(const DecisionTreeModel& model, const Vocabulary& vocab,
                  const std::vector<LabeledDocument>& test,
                  const PipelineConfig& config, const StopList& stoplist,
                  WeightingScheme weighting) {
  if (test.empty()) throw ConfigError("no test documents");
  if (model.vocab_checksum != vocab.checksum()) {
    throw RuntimeError(
        "vocabulary mismatch: the model was trained against a different "
        "vocabulary");
  }
  std::vector<std::pair<PageType, PageType>> pairs;
  pairs.reserve(test.size());
  for (const auto& doc : test) {
    pairs.emplace_back(doc.label,
                       classify_document(doc.document, model, vocab, config,
                                         stoplist, weighting));
  }
  return metrics(confusion(pairs));
}

std::string format_report(const EvalReport& report) {
  std::string out;
  char buf[160];

  out += "classes:\n";
  for (PageType type : all_page_types()) {
    std::snprintf(buf, sizeof buf, "  [%zu] %s\n", index_of(type),
                  std::string(to_label(type)).c_str());
    out += buf;
  }

  out += "confusion matrix (rows = true, columns = predicted):\n";
  out += "      ";
  for (std::size_t j = 0; j < kPageTypeCount; ++j) {
    std::snprintf(buf, sizeof buf, "   [%zu]", j);
    out += buf;
  }
  out += '\n';
  for (std::size_t i = 0; i < kPageTypeCount; ++i) {
    std::snprintf(buf, sizeof buf, "  [%zu] ", i);
    out += buf;
    for (std::size_t j = 0; j < kPageTypeCount; ++j) {
      std::snprintf(buf, sizeof buf, "%6zu", report.matrix.counts[i][j]);
      out += buf;
    }
    out += '\n';
  }

  out += "per class (* marks an undefined metric, zero denominator):\n";
  std::snprintf(buf, sizeof buf, "  %-22s %9s %9s %9s\n", "class", "precision",
                "recall", "f-measure");
  out += buf;
  auto cell = [&](const std::optional<double>& value) {
    char text[32];
    if (value) {
      std::snprintf(text, sizeof text, "%9.2f", *value);
    } else {
      std::snprintf(text, sizeof text, "%9s", "0.00*");
    }
    return std::string(text);
  };
  for (PageType type : all_page_types()) {
    const ClassMetrics& m = report.per_class[index_of(type)];
    std::snprintf(buf, sizeof buf, "  %-22s %s %s %s\n",
                  std::string(to_label(type)).c_str(),
                  cell(m.precision).c_str(), cell(m.recall).c_str(),
                  cell(m.f_measure).c_str());
    out += buf;
  }

  std::snprintf(buf, sizeof buf, "accuracy: %.2f%% (%zu of %zu)\n",
                100.0 * report.accuracy, report.matrix.trace(),
                report.matrix.total());
  out += buf;
  return out;
}

}  // namespace unilink
