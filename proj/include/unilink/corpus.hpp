#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "unilink/page_type.hpp"

namespace unilink {

struct Institution {
  std::string id;
  std::string name;
  std::vector<std::string> domain_suffixes;  // lowercase, e.g. "wlv.ac.uk"

  bool operator==(const Institution&) const = default;
};

using Registry = std::vector<Institution>;

struct Document {
  std::string id;
  std::string url;
  std::string institution_id;
  std::string title;  // may be empty
  std::optional<std::int64_t> fetched_at;  // unix seconds

  bool operator==(const Document&) const = default;
};

struct LabeledDocument {
  Document document;
  PageType label = PageType::About;
  std::string source;  // "manual" | "synthetic"

  bool operator==(const LabeledDocument&) const = default;
};

// Immutable after load; iteration order is the file order.
struct Corpus {
  std::vector<LabeledDocument> documents;
  Registry registry;

  std::size_t size() const { return documents.size(); }
};

// Fractions of real-web pages per type reported for the UK academic web
// (Business and Innovation contributed under 1% and has no reported share).
// Reference data for documentation and reports; synthetic corpora are not
// expected to match it.
struct ReferencePageShare {
  PageType type;
  double share;
};
inline constexpr std::array<ReferencePageShare, 7> kReferencePageShares = {{
    {PageType::Support, 0.35},
    {PageType::Research, 0.286},
    {PageType::Staff, 0.14},
    {PageType::About, 0.097},
    {PageType::Discussion, 0.094},
    {PageType::StudentLife, 0.018},
    {PageType::Study, 0.012},
}};

// Registry file: one JSON object per line with keys {id, name, suffixes}.
// Validates institution invariants, including that no suffix in the registry
// is a suffix of another.
Registry load_registry(const std::filesystem::path& path);
void save_registry(const Registry& registry, const std::filesystem::path& path);

const Institution* find_institution(const Registry& registry,
                                    std::string_view id);

// Corpus file: one JSON object per line with keys
// {id, url, institution, title, label, source}. Errors carry line numbers.
Corpus load_corpus(const std::filesystem::path& path, Registry registry);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Unlabeled pages (crawl output, classify input): same line format minus
// label and source.
std::vector<Document> load_documents(const std::filesystem::path& path);
void save_documents(const std::vector<Document>& documents,
                    const std::filesystem::path& path);

struct SplitOptions {
  double train_fraction = 2.0 / 3.0;
  std::uint64_t seed = 0;
  // Off by default: plain uniform split by document. When on, the same
  // fraction is applied within each class.
  bool stratified = false;
};

// Disjoint partition covering every document. |train| is the train fraction
// of N rounded half-up. Identical (corpus, options) give identical splits.
std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus,
                                           const SplitOptions& options);

// Counts per class; absent classes report 0 (all eight keys always present).
std::map<PageType, std::size_t> class_distribution(const Corpus& corpus);

}  // namespace unilink
