#include "unilink/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "unilink/errors.hpp"

namespace unilink {

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  throw ConfigError("key '" + key + "': expected a boolean, got '" + value +
                    "'");
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t parsed = 0;
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, "
                      "got '" + value + "'");
  }
  return parsed;
}

double parse_real(const std::string& key, const std::string& value) {
  double parsed = 0.0;
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value +
                      "'");
  }
  return parsed;
}

const std::vector<std::string> kSections = {
    "pipeline", "tree", "select", "eval", "run",
    "paths",    "crawl", "report", "links",
};

}  // namespace

TrainOptions RunConfig::train_options() const {
  TrainOptions options;
  options.pipeline = pipeline;
  options.weighting = weighting;
  options.feature_k = feature_k;
  options.criterion = criterion;
  options.tree = tree;
  options.prune = prune;
  options.restrict_retrain = restrict_retrain;
  options.seed = seed;
  return options;
}

void apply_config_key(RunConfig& config, const std::string& key,
                      const std::string& value) {
  if (key == "use_title") {
    config.pipeline.use_title = parse_bool(key, value);
  } else if (key == "use_url") {
    config.pipeline.use_url = parse_bool(key, value);
  } else if (key == "stemming") {
    config.pipeline.use_stemming = parse_bool(key, value);
  } else if (key == "stopwords") {
    config.pipeline.use_stopwords = parse_bool(key, value);
  } else if (key == "ngrams") {
    if (value == "unigrams") {
      config.pipeline.ngram_mode = NgramMode::UnigramsOnly;
    } else if (value == "bigrams") {
      config.pipeline.ngram_mode = NgramMode::BigramsPlusUnigrams;
    } else {
      throw ConfigError("key 'ngrams': expected unigrams or bigrams, got '" +
                        value + "'");
    }
  } else if (key == "weighting") {
    if (value == "tf") {
      config.weighting = WeightingScheme::TF;
    } else if (value == "tfidf") {
      config.weighting = WeightingScheme::TFIDF;
    } else {
      throw ConfigError("key 'weighting': expected tf or tfidf, got '" +
                        value + "'");
    }
  } else if (key == "criterion") {
    auto criterion = parse_criterion(value);
    if (!criterion) {
      throw ConfigError("key 'criterion': expected entropy or gini, got '" +
                        value + "'");
    }
    config.criterion = *criterion;
  } else if (key == "min_leaf") {
    config.tree.min_leaf = parse_unsigned(key, value);
    if (config.tree.min_leaf == 0) {
      throw ConfigError("key 'min_leaf': must be >= 1");
    }
  } else if (key == "max_depth") {
    if (value == "none") {
      config.tree.max_depth.reset();
    } else {
      config.tree.max_depth = parse_unsigned(key, value);
    }
  } else if (key == "min_gain") {
    config.tree.min_gain = parse_real(key, value);
  } else if (key == "prune") {
    config.prune = parse_bool(key, value);
  } else if (key == "restrict_retrain") {
    config.restrict_retrain = parse_bool(key, value);
  } else if (key == "feature_k") {
    config.feature_k = parse_unsigned(key, value);
  } else if (key == "cv_folds") {
    config.cv_folds = parse_unsigned(key, value);
  } else if (key == "seed") {
    config.seed = parse_unsigned(key, value);
  } else if (key == "verbose") {
    config.verbose = parse_bool(key, value);
  } else if (key == "output_dir") {
    config.output_dir = value;
  } else if (key == "registry") {
    config.registry_path = value;
  } else if (key == "corpus") {
    config.corpus_path = value;
  } else if (key == "test_corpus") {
    config.test_corpus_path = value;
  } else if (key == "stoplist") {
    config.stoplist_path = value;
  } else if (key == "model") {
    config.model_path = value;
  } else if (key == "vocab") {
    config.vocab_path = value;
  } else if (key == "links") {
    config.links_path = value;
  } else if (key == "motivations") {
    config.motivations_path = value;
  } else if (key == "pages") {
    config.pages_path = value;
  } else if (key == "institution") {
    config.institution = value;
  } else if (key == "seed_url") {
    config.seed_url = value;
  } else if (key == "fixture_dir") {
    config.fixture_dir = value;
  } else if (key == "live") {
    config.live = parse_bool(key, value);
  } else if (key == "miss_threshold") {
    config.miss_threshold = parse_unsigned(key, value);
    if (config.miss_threshold == 0) {
      throw ConfigError("key 'miss_threshold': must be >= 1");
    }
  } else if (key == "max_pages") {
    if (value == "none") {
      config.max_pages.reset();
    } else {
      config.max_pages = parse_unsigned(key, value);
    }
  } else if (key == "politeness_ms") {
    config.politeness_ms = parse_unsigned(key, value);
  } else if (key == "same_site_only") {
    config.same_site_only = parse_bool(key, value);
  } else if (key == "sweep_k") {
    std::vector<std::size_t> ks;
    std::size_t start = 0;
    while (start <= value.size()) {
      auto comma = value.find(',', start);
      if (comma == std::string::npos) comma = value.size();
      const std::string part = trim(value.substr(start, comma - start));
      if (!part.empty()) ks.push_back(parse_unsigned(key, part));
      start = comma + 1;
    }
    if (ks.empty()) throw ConfigError("key 'sweep_k': empty list");
    config.sweep_k = std::move(ks);
  } else if (key == "keep_mixed") {
    config.keep_mixed = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "use_title",      "use_url",       "stemming",       "stopwords",
      "ngrams",         "weighting",     "criterion",      "min_leaf",
      "max_depth",      "min_gain",      "prune",          "restrict_retrain",
      "feature_k",      "cv_folds",      "seed",           "verbose",
      "output_dir",     "registry",      "corpus",         "test_corpus",
      "stoplist",       "model",         "vocab",          "links",
      "motivations",    "pages",         "institution",    "seed_url",
      "fixture_dir",    "live",          "miss_threshold", "max_pages",
      "politeness_ms",  "same_site_only", "sweep_k",       "keep_mixed",
  };
  return keys;
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto comment = line.find_first_of("#;");
        comment != std::string::npos) {
      line.erase(comment);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": unterminated section header");
      }
      const std::string section = trim(line.substr(1, line.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), section) ==
          kSections.end()) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_key(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
}

}  // namespace unilink
