#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "unilink/corpus.hpp"

namespace unilink {

// A token is a non-empty, all-lowercase, all-alphabetic string. tokenize() is
// the only producer, so the invariant is maintained by construction.
using Token = std::string;

// Splits on every maximal run of non-alphabetic characters, lowercases, and
// drops empty fragments. Digits and punctuation act as separators and are
// never part of a token. Total over all byte strings.
std::vector<Token> tokenize(std::string_view text);

enum class NgramMode {
  UnigramsOnly,
  BigramsPlusUnigrams,
};

struct PipelineConfig {
  bool use_title = true;
  bool use_url = true;
  bool use_stemming = true;
  bool use_stopwords = true;
  NgramMode ngram_mode = NgramMode::UnigramsOnly;

  bool valid() const { return use_title || use_url; }
};

class StopList {
 public:
  StopList() = default;

  // One word per line; '#' starts a comment; blank lines ignored. Entries are
  // lowercased. The protocol tokens www/http/https are always added on top of
  // whatever the file lists.
  static StopList load(const std::filesystem::path& path);

  // The bundled base list must already include www/http/https; construction
  // from an arbitrary word set adds them too.
  static StopList from_words(const std::vector<std::string>& words);

  // Tokenizes every institution name with this module's tokenizer and adds
  // all resulting tokens. Stop-word removal runs on unstemmed surfaces, so
  // the names are added unstemmed.
  void add_institution_names(const Registry& registry);

  void add(std::string_view word);
  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// Order-preserving filter; output is a subsequence of the input.
std::vector<Token> remove_stopwords(const std::vector<Token>& tokens,
                                    const StopList& stoplist);

// Porter stem of a single token (see porter.hpp for the algorithm).
Token stem(const Token& token);

// UnigramsOnly: identity on surfaces. BigramsPlusUnigrams: all unigrams in
// order, then every adjacent pair joined with '_'.
std::vector<std::string> expand_ngrams(const std::vector<Token>& tokens,
                                       NgramMode mode);

// Full preprocessing for one document: title tokens (if enabled) followed by
// URL tokens (if enabled), then stop-word removal, then stemming, then n-gram
// expansion. Stop-word removal precedes stemming so institution-name entries
// match unstemmed surfaces.
std::vector<std::string> preprocess(const Document& document,
                                    const PipelineConfig& config,
                                    const StopList& stoplist);

}  // namespace unilink
