#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "unilink/dtree.hpp"
#include "unilink/pipeline.hpp"
#include "unilink/textprep.hpp"
#include "unilink/vectorize.hpp"

namespace unilink {

// One knob set for every command. Defaults reproduce the best-performing
// preprocessing configuration: unigrams, stemming and stop-word removal on,
// title and URL as sources, TF weighting.
struct RunConfig {
  PipelineConfig pipeline;
  WeightingScheme weighting = WeightingScheme::TF;
  SplitCriterion criterion = SplitCriterion::Entropy;
  std::size_t feature_k = 250;
  TreeHyperparams tree;
  bool prune = true;
  bool restrict_retrain = true;
  std::size_t cv_folds = 10;
  std::uint64_t seed = 7;
  bool verbose = false;

  std::string output_dir = ".";
  std::string registry_path;
  std::string corpus_path;
  std::string test_corpus_path;
  std::string stoplist_path;
  std::string model_path;
  std::string vocab_path;
  std::string links_path;
  std::string motivations_path;
  std::string pages_path;

  std::string institution;
  std::string seed_url;
  std::string fixture_dir;
  bool live = false;
  std::size_t miss_threshold = 2000;
  std::optional<std::size_t> max_pages;
  std::size_t politeness_ms = 1000;
  bool same_site_only = true;

  std::vector<std::size_t> sweep_k = {10, 50, 100, 250, 500, 1000};
  bool keep_mixed = true;

  TrainOptions train_options() const;
};

// Every key a config file or a same-named command-line flag can set. Throws
// ConfigError on unknown keys or unparseable values.
void apply_config_key(RunConfig& config, const std::string& key,
                      const std::string& value);

// The full key list, for generating command-line flags.
const std::vector<std::string>& config_keys();

// INI-style file: [section] headers group keys, '#' or ';' comments,
// key = value lines. Sections are organizational; keys are globally unique.
void load_config_file(RunConfig& config, const std::filesystem::path& path);

}  // namespace unilink
