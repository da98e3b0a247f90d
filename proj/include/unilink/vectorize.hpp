#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "unilink/page_type.hpp"

namespace unilink {

using FeatureId = std::int32_t;

// Term dictionary built over a training corpus. Feature ids are dense and
// follow first-occurrence order; doc_freq counts documents containing a term
// at least once.
struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, FeatureId> index;
  std::vector<std::size_t> doc_freq;  // by feature id
  std::size_t n_docs = 0;

  std::size_t size() const { return terms.size(); }

  // FNV-1a over n_docs and the ordered (term, df) sequence; ties a trained
  // model to the vocabulary it was built with.
  std::string checksum() const;
};

// Sparse non-negative weights; zero entries are never stored.
struct FeatureVector {
  std::map<FeatureId, double> entries;

  double weight(FeatureId id) const {
    auto it = entries.find(id);
    return it == entries.end() ? 0.0 : it->second;
  }
};

enum class WeightingScheme {
  TF,
  TFIDF,  // tf * log2(n_docs / doc_freq)
};

Vocabulary build_vocabulary(
    const std::vector<std::vector<std::string>>& term_lists);

// Terms not in the vocabulary are ignored; a TFIDF weight of zero (df equal
// to n_docs) yields no entry.
FeatureVector vectorize(const std::vector<std::string>& term_list,
                        const Vocabulary& vocab, WeightingScheme scheme);

using LabeledVector = std::pair<FeatureVector, PageType>;

// Information gain of every feature over the labeled set, features binarized
// to present/absent for ranking purposes. Descending by gain, ties by
// ascending feature id. Throws on an empty dataset.
std::vector<std::pair<FeatureId, double>> information_gain_rank(
    const std::vector<LabeledVector>& dataset, const Vocabulary& vocab);

// Prefix of the ranking: the min(k, |ranking|) best feature ids.
std::set<FeatureId> select_top_k(
    const std::vector<std::pair<FeatureId, double>>& ranking, std::size_t k);

// Term, id and df, one line per term. The vocabulary dump format.
std::string dump_vocabulary(const Vocabulary& vocab);
Vocabulary parse_vocabulary_dump(const std::string& text);

}  // namespace unilink
