#include "unilink/textprep.hpp"

#include <cctype>
#include <fstream>

#include "unilink/errors.hpp"
#include "unilink/porter.hpp"

namespace unilink {

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

StopList StopList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open stop list " + path.string());
  StopList list;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    for (const Token& token : tokenize(line)) list.words_.insert(token);
  }
  list.add("www");
  list.add("http");
  list.add("https");
  return list;
}

StopList StopList::from_words(const std::vector<std::string>& words) {
  StopList list;
  for (const auto& word : words) list.add(word);
  list.add("www");
  list.add("http");
  list.add("https");
  return list;
}

void StopList::add_institution_names(const Registry& registry) {
  for (const Institution& inst : registry) {
    for (const Token& token : tokenize(inst.name)) words_.insert(token);
  }
}

void StopList::add(std::string_view word) {
  for (const Token& token : tokenize(word)) words_.insert(token);
}

bool StopList::contains(std::string_view word) const {
  return words_.count(std::string(word)) > 0;
}

std::vector<Token> remove_stopwords(const std::vector<Token>& tokens,
                                    const StopList& stoplist) {
  std::vector<Token> kept;
  kept.reserve(tokens.size());
  for (const Token& token : tokens) {
    if (!stoplist.contains(token)) kept.push_back(token);
  }
  return kept;
}

Token stem(const Token& token) { return porter_stem(token); }

std::vector<std::string> expand_ngrams(const std::vector<Token>& tokens,
                                       NgramMode mode) {
  std::vector<std::string> terms(tokens.begin(), tokens.end());
  if (mode == NgramMode::BigramsPlusUnigrams) {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      terms.push_back(tokens[i] + "_" + tokens[i + 1]);
    }
  }
  return terms;
}

std::vector<std::string> preprocess(const Document& document,
                                    const PipelineConfig& config,
                                    const StopList& stoplist) {
  std::vector<Token> tokens;
  if (config.use_title) {
    for (Token& t : tokenize(document.title)) tokens.push_back(std::move(t));
  }
  if (config.use_url) {
    for (Token& t : tokenize(document.url)) tokens.push_back(std::move(t));
  }
  if (config.use_stopwords) tokens = remove_stopwords(tokens, stoplist);
  if (config.use_stemming) {
    for (Token& token : tokens) token = stem(token);
  }
  return expand_ngrams(tokens, config.ngram_mode);
}

}  // namespace unilink
