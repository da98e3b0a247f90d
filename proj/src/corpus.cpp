#include "unilink/corpus.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "unilink/errors.hpp"
#include "unilink/rng.hpp"
#include "unilink/url.hpp"

namespace unilink {

namespace {

using json = nlohmann::ordered_json;

json parse_record(const std::filesystem::path& file, std::size_t line_no,
                  const std::string& line) {
  json record = json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) {
    throw ParseError(file.string(), line_no, "malformed record");
  }
  return record;
}

std::string require_string(const json& record, const char* key,
                           const std::filesystem::path& file,
                           std::size_t line_no) {
  if (!record.contains(key) || !record[key].is_string()) {
    throw ParseError(file.string(), line_no,
                     std::string("missing or non-string field '") + key + "'");
  }
  return record[key].get<std::string>();
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open " + path.string());
  return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  return out;
}

void check_document(const Document& doc, const Registry& registry,
                    const std::filesystem::path& file, std::size_t line_no) {
  const Institution* inst = find_institution(registry, doc.institution_id);
  if (inst == nullptr) {
    throw ParseError(file.string(), line_no,
                     "unknown institution id '" + doc.institution_id + "'");
  }
  Url url;
  try {
    url = parse_url(doc.url);
  } catch (const RuntimeError& e) {
    throw ParseError(file.string(), line_no,
                     "bad url '" + doc.url + "': " + e.what());
  }
  bool matched = false;
  for (const auto& suffix : inst->domain_suffixes) {
    if (host_matches_suffix(url.host, suffix)) {
      matched = true;
      break;
    }
  }
  if (!matched) {
    throw ParseError(file.string(), line_no,
                     "url host '" + url.host + "' matches no suffix of '" +
                         inst->id + "'");
  }
}

}  // namespace

Registry load_registry(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  Registry registry;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = parse_record(path, line_no, line);
    Institution inst;
    inst.id = require_string(record, "id", path, line_no);
    inst.name = require_string(record, "name", path, line_no);
    if (!record.contains("suffixes") || !record["suffixes"].is_array() ||
        record["suffixes"].empty()) {
      throw ParseError(path.string(), line_no,
                       "institution needs a non-empty 'suffixes' array");
    }
    for (const auto& entry : record["suffixes"]) {
      if (!entry.is_string()) {
        throw ParseError(path.string(), line_no, "suffix is not a string");
      }
      std::string suffix = entry.get<std::string>();
      for (char c : suffix) {
        if (std::isupper(static_cast<unsigned char>(c))) {
          throw ParseError(path.string(), line_no,
                           "suffix '" + suffix + "' must be lowercase");
        }
      }
      inst.domain_suffixes.push_back(std::move(suffix));
    }
    registry.push_back(std::move(inst));
  }
  // Registry-wide invariants: unique ids, and no suffix contained in another.
  std::unordered_set<std::string> ids;
  std::vector<std::string> all_suffixes;
  for (const auto& inst : registry) {
    if (!ids.insert(inst.id).second) {
      throw RuntimeError(path.string() + ": duplicate institution id '" +
                         inst.id + "'");
    }
    all_suffixes.insert(all_suffixes.end(), inst.domain_suffixes.begin(),
                        inst.domain_suffixes.end());
  }
  for (std::size_t i = 0; i < all_suffixes.size(); ++i) {
    for (std::size_t j = 0; j < all_suffixes.size(); ++j) {
      if (i != j && all_suffixes[j].ends_with(all_suffixes[i])) {
        throw RuntimeError(path.string() + ": suffix '" + all_suffixes[i] +
                           "' is a suffix of '" + all_suffixes[j] + "'");
      }
    }
  }
  return registry;
}

void save_registry(const Registry& registry,
                   const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  for (const auto& inst : registry) {
    json record;
    record["id"] = inst.id;
    record["name"] = inst.name;
    record["suffixes"] = inst.domain_suffixes;
    out << record.dump() << '\n';
  }
}

const Institution* find_institution(const Registry& registry,
                                    std::string_view id) {
  for (const auto& inst : registry) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

Corpus load_corpus(const std::filesystem::path& path, Registry registry) {
  std::ifstream in = open_for_read(path);
  Corpus corpus;
  corpus.registry = std::move(registry);
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = parse_record(path, line_no, line);
    LabeledDocument doc;
    doc.document.id = require_string(record, "id", path, line_no);
    doc.document.url = require_string(record, "url", path, line_no);
    doc.document.institution_id =
        require_string(record, "institution", path, line_no);
    doc.document.title = require_string(record, "title", path, line_no);
    std::string label = require_string(record, "label", path, line_no);
    auto parsed = parse_page_type(label);
    if (!parsed) {
      throw ParseError(path.string(), line_no,
                       "unknown page-type label '" + label +
                           "' (valid labels: " + valid_page_type_labels() +
                           ")");
    }
    doc.label = *parsed;
    doc.source = require_string(record, "source", path, line_no);
    if (record.contains("fetched_at")) {
      if (!record["fetched_at"].is_number_integer()) {
        throw ParseError(path.string(), line_no,
                         "'fetched_at' must be an integer");
      }
      doc.document.fetched_at = record["fetched_at"].get<std::int64_t>();
    }
    if (!seen_ids.insert(doc.document.id).second) {
      throw ParseError(path.string(), line_no,
                       "duplicate document id '" + doc.document.id + "'");
    }
    check_document(doc.document, corpus.registry, path, line_no);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  for (const auto& doc : corpus.documents) {
    json record;
    record["id"] = doc.document.id;
    record["url"] = doc.document.url;
    record["institution"] = doc.document.institution_id;
    record["title"] = doc.document.title;
    record["label"] = std::string(to_label(doc.label));
    record["source"] = doc.source;
    if (doc.document.fetched_at) record["fetched_at"] = *doc.document.fetched_at;
    out << record.dump() << '\n';
  }
}

std::vector<Document> load_documents(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  std::vector<Document> documents;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = parse_record(path, line_no, line);
    Document doc;
    doc.id = require_string(record, "id", path, line_no);
    doc.url = require_string(record, "url", path, line_no);
    doc.institution_id = require_string(record, "institution", path, line_no);
    doc.title = require_string(record, "title", path, line_no);
    if (record.contains("fetched_at")) {
      if (!record["fetched_at"].is_number_integer()) {
        throw ParseError(path.string(), line_no,
                         "'fetched_at' must be an integer");
      }
      doc.fetched_at = record["fetched_at"].get<std::int64_t>();
    }
    if (!seen_ids.insert(doc.id).second) {
      throw ParseError(path.string(), line_no,
                       "duplicate document id '" + doc.id + "'");
    }
    documents.push_back(std::move(doc));
  }
  return documents;
}

void save_documents(const std::vector<Document>& documents,
                    const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  for (const auto& doc : documents) {
    json record;
    record["id"] = doc.id;
    record["url"] = doc.url;
    record["institution"] = doc.institution_id;
    record["title"] = doc.title;
    if (doc.fetched_at) record["fetched_at"] = *doc.fetched_at;
    out << record.dump() << '\n';
  }
}

std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus,
                                           const SplitOptions& options) {
  if (corpus.documents.empty()) {
    throw ConfigError("cannot split an empty corpus");
  }
  if (!(options.train_fraction > 0.0) || !(options.train_fraction < 1.0)) {
    throw ConfigError("train fraction must be strictly between 0 and 1");
  }

  const auto take_count = [&](std::size_t n) {
    // round half-up
    return static_cast<std::size_t>(
        std::floor(options.train_fraction * static_cast<double>(n) + 0.5));
  };

  std::vector<bool> in_train(corpus.documents.size(), false);
  if (options.stratified) {
    std::map<PageType, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
      by_class[corpus.documents[i].label].push_back(i);
    }
    Rng rng = make_rng(options.seed);
    for (auto& [type, indices] : by_class) {
      deterministic_shuffle(indices, rng);
      const std::size_t take = take_count(indices.size());
      for (std::size_t k = 0; k < take; ++k) in_train[indices[k]] = true;
    }
  } else {
    std::vector<std::size_t> order =
        shuffled_indices(corpus.documents.size(), options.seed);
    const std::size_t take = take_count(order.size());
    for (std::size_t k = 0; k < take; ++k) in_train[order[k]] = true;
  }

  Corpus train;
  Corpus test;
  train.registry = corpus.registry;
  test.registry = corpus.registry;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    (in_train[i] ? train : test).documents.push_back(corpus.documents[i]);
  }
  return {std::move(train), std::move(test)};
}

std::map<PageType, std::size_t> class_distribution(const Corpus& corpus) {
  std::map<PageType, std::size_t> counts;
  for (PageType type : all_page_types()) counts[type] = 0;
  for (const auto& doc : corpus.documents) ++counts[doc.label];
  return counts;
}

}  // namespace unilink
