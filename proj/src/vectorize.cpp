#include "unilink/vectorize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "unilink/errors.hpp"

namespace unilink {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& hash, std::string_view bytes) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= kFnvPrime;
  }
}

double entropy_bits(const std::array<std::size_t, kPageTypeCount>& counts,
                    std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

std::string Vocabulary::checksum() const {
  std::uint64_t hash = kFnvOffset;
  fnv_mix(hash, std::to_string(n_docs));
  for (std::size_t i = 0; i < terms.size(); ++i) {
    fnv_mix(hash, "\x1f");
    fnv_mix(hash, terms[i]);
    fnv_mix(hash, "\x1f");
    fnv_mix(hash, std::to_string(doc_freq[i]));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buf);
}

Vocabulary build_vocabulary(
    const std::vector<std::vector<std::string>>& term_lists) {
  Vocabulary vocab;
  vocab.n_docs = term_lists.size();
  for (const auto& terms : term_lists) {
    std::vector<FeatureId> seen_in_doc;
    for (const auto& term : terms) {
      auto [it, inserted] =
          vocab.index.try_emplace(term, static_cast<FeatureId>(vocab.terms.size()));
      if (inserted) {
        vocab.terms.push_back(term);
        vocab.doc_freq.push_back(0);
      }
      seen_in_doc.push_back(it->second);
    }
    std::sort(seen_in_doc.begin(), seen_in_doc.end());
    seen_in_doc.erase(std::unique(seen_in_doc.begin(), seen_in_doc.end()),
                      seen_in_doc.end());
    for (FeatureId id : seen_in_doc) ++vocab.doc_freq[id];
  }
  return vocab;
}

FeatureVector vectorize(const std::vector<std::string>& term_list,
                        const Vocabulary& vocab, WeightingScheme scheme) {
  FeatureVector vec;
  for (const auto& term : term_list) {
    auto it = vocab.index.find(term);
    if (it == vocab.index.end()) continue;
    vec.entries[it->second] += 1.0;
  }
  if (scheme == WeightingScheme::TFIDF) {
    for (auto it = vec.entries.begin(); it != vec.entries.end();) {
      const double idf =
          std::log2(static_cast<double>(vocab.n_docs) /
                    static_cast<double>(vocab.doc_freq[it->first]));
      it->second *= idf;
      if (it->second == 0.0) {
        it = vec.entries.erase(it);
      } else {
        ++it;
      }
    }
  }
  return vec;
}

std::vector<std::pair<FeatureId, double>> information_gain_rank(
    const std::vector<LabeledVector>& dataset, const Vocabulary& vocab) {
  if (dataset.empty()) {
    throw ConfigError("information gain needs a non-empty dataset");
  }
  const std::size_t n = dataset.size();

  std::array<std::size_t, kPageTypeCount> total_counts{};
  for (const auto& [vec, label] : dataset) ++total_counts[index_of(label)];
  const double parent_entropy = entropy_bits(total_counts, n);

  // Per-feature class counts among documents where the feature is present.
  std::vector<std::array<std::size_t, kPageTypeCount>> present(
      vocab.size(), std::array<std::size_t, kPageTypeCount>{});
  std::vector<std::size_t> present_total(vocab.size(), 0);
  for (const auto& [vec, label] : dataset) {
    for (const auto& [id, weight] : vec.entries) {
      if (weight == 0.0) continue;
      ++present[id][index_of(label)];
      ++present_total[id];
    }
  }

  std::vector<std::pair<FeatureId, double>> ranking;
  ranking.reserve(vocab.size());
  for (std::size_t f = 0; f < vocab.size(); ++f) {
    std::array<std::size_t, kPageTypeCount> absent{};
    for (std::size_t c = 0; c < kPageTypeCount; ++c) {
      absent[c] = total_counts[c] - present[f][c];
    }
    const std::size_t np = present_total[f];
    const std::size_t na = n - np;
    const double child =
        (static_cast<double>(np) / n) * entropy_bits(present[f], np) +
        (static_cast<double>(na) / n) * entropy_bits(absent, na);
    ranking.emplace_back(static_cast<FeatureId>(f), parent_entropy - child);
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  return ranking;
}

std::set<FeatureId> select_top_k(
    const std::vector<std::pair<FeatureId, double>>& ranking, std::size_t k) {
  std::set<FeatureId> selected;
  for (std::size_t i = 0; i < ranking.size() && i < k; ++i) {
    selected.insert(ranking[i].first);
  }
  return selected;
}

std::string dump_vocabulary(const Vocabulary& vocab) {
  std::ostringstream out;
  out << "# n_docs " << vocab.n_docs << "\n";
  for (std::size_t i = 0; i < vocab.terms.size(); ++i) {
    out << vocab.terms[i] << '\t' << i << '\t' << vocab.doc_freq[i] << "\n";
  }
  return out.str();
}

Vocabulary parse_vocabulary_dump(const std::string& text) {
  Vocabulary vocab;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# n_docs ", 0) == 0) {
      vocab.n_docs = std::stoull(line.substr(9));
      continue;
    }
    std::istringstream fields(line);
    std::string term;
    std::size_t id = 0;
    std::size_t df = 0;
    if (!std::getline(fields, term, '\t') || !(fields >> id) ||
        !(fields.ignore(1), fields >> df)) {
      throw ParseError("vocabulary dump", line_no, "expected term<TAB>id<TAB>df");
    }
    if (id != vocab.terms.size()) {
      throw ParseError("vocabulary dump", line_no, "feature ids must be dense");
    }
    vocab.index.emplace(term, static_cast<FeatureId>(id));
    vocab.terms.push_back(std::move(term));
    vocab.doc_freq.push_back(df);
  }
  return vocab;
}

}  // namespace unilink
