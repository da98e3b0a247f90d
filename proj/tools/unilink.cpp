#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unilink/config.hpp"
#include "unilink/corpus.hpp"
#include "unilink/crawler.hpp"
#include "unilink/dtree.hpp"
#include "unilink/errors.hpp"
#include "unilink/eval.hpp"
#include "unilink/linkmap.hpp"
#include "unilink/pipeline.hpp"
#include "unilink/textprep.hpp"
#include "unilink/url.hpp"
#include "unilink/vectorize.hpp"

namespace fs = std::filesystem;
using namespace unilink;

namespace {

// Advisory exclusive lock on the output directory; concurrent commands
// writing to the same place fail fast instead of interleaving files.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) {
    fs::create_directories(dir);
    path_ = dir / ".lock";
    fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) {
      throw RuntimeError("cannot open lock file " + path_.string());
    }
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw RuntimeError("output directory " + dir.string() +
                         " is in use by another command");
    }
  }
  ~OutputLock() {
    if (fd_ >= 0) ::close(fd_);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

void require_path(const std::string& value, const std::string& key) {
  if (value.empty()) {
    throw ConfigError("missing required path: set '" + key +
                      "' in the config file or pass --" + key);
  }
  if (!fs::exists(value)) {
    throw ConfigError(key + " file not found: " + value);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot open " + path.string());
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << content;
}

void log_verbose(const RunConfig& config, const std::string& message) {
  if (config.verbose) std::cerr << "unilink: " << message << "\n";
}

StopList load_stoplist(const RunConfig& config, const Registry& registry) {
  require_path(config.stoplist_path, "stoplist");
  StopList stoplist = StopList::load(config.stoplist_path);
  stoplist.add_institution_names(registry);
  return stoplist;
}

Registry load_registry_checked(const RunConfig& config) {
  require_path(config.registry_path, "registry");
  return load_registry(config.registry_path);
}

Corpus load_corpus_checked(const RunConfig& config) {
  require_path(config.corpus_path, "corpus");
  return load_corpus(config.corpus_path, load_registry_checked(config));
}

std::pair<DecisionTreeModel, Vocabulary> load_model_checked(
    const RunConfig& config) {
  require_path(config.vocab_path, "vocab");
  require_path(config.model_path, "model");
  Vocabulary vocab = parse_vocabulary_dump(read_file(config.vocab_path));
  DecisionTreeModel model = load_model(config.model_path, vocab);
  return {std::move(model), std::move(vocab)};
}

std::string model_summary(const DecisionTreeModel& model,
                          std::size_t selected_count) {
  std::string out;
  out += "nodes: " + std::to_string(count_nodes(*model.root)) + "\n";
  out += "depth: " + std::to_string(tree_depth(*model.root)) + "\n";
  out += "features used: " +
         std::to_string(restrict_to_used_features(model).size()) + "\n";
  out += "features selected: " + std::to_string(selected_count) + "\n";
  out += "criterion: " + std::string(criterion_name(model.criterion)) + "\n";
  out += "vocabulary: " + std::to_string(model.vocab_size) + " terms, " +
         "checksum " + model.vocab_checksum + "\n";
  return out;
}

int cmd_crawl(const RunConfig& config) {
  const Registry registry = load_registry_checked(config);
  if (config.seed_url.empty()) {
    throw ConfigError("missing required value: seed_url");
  }
  if (config.institution.empty()) {
    throw ConfigError("missing required value: institution");
  }
  const Institution* institution =
      find_institution(registry, config.institution);
  if (!institution) {
    throw ConfigError("institution '" + config.institution +
                      "' is not in the registry");
  }

  FixtureFetcher fixture;
  LiveFetcher live{std::chrono::milliseconds(config.politeness_ms)};
  Fetcher* fetcher = nullptr;
  if (config.live) {
    fetcher = &live;
  } else {
    if (config.fixture_dir.empty()) {
      throw ConfigError(
          "offline crawls need fixture_dir (or set live = true)");
    }
    fixture = FixtureFetcher::load(config.fixture_dir);
    fetcher = &fixture;
  }

  CrawlPolicy policy;
  policy.miss_threshold = config.miss_threshold;
  policy.max_pages = config.max_pages;
  policy.politeness_delay = std::chrono::milliseconds(config.politeness_ms);
  policy.same_site_only = config.same_site_only;

  const CrawlResult result =
      crawl(parse_url(config.seed_url), *institution, registry, policy,
            *fetcher);

  const fs::path out = config.output_dir;
  save_documents(result.documents, out / "pages.jsonl");
  save_links(result.links, out / "links.jsonl");

  std::string stats;
  stats += "pages fetched: " + std::to_string(result.stats.pages_fetched) +
           "\n";
  stats += "pages failed: " + std::to_string(result.stats.pages_failed) + "\n";
  stats += "inter-institution links: " +
           std::to_string(result.stats.links_found) + "\n";
  stats += "frontier additions: " +
           std::to_string(result.stats.frontier_additions) + "\n";
  stats += "stop rule triggered: " +
           (result.stats.stop_trigger_index
                ? "at page " + std::to_string(*result.stats.stop_trigger_index)
                : std::string("never")) +
           "\n";
  write_file(out / "crawl_stats.txt", stats);
  std::cout << stats;
  return 0;
}

int cmd_prep(const RunConfig& config) {
  const Corpus corpus = load_corpus_checked(config);
  const StopList stoplist = load_stoplist(config, corpus.registry);

  std::vector<std::vector<std::string>> term_lists;
  std::size_t total_tokens = 0;
  term_lists.reserve(corpus.size());
  for (const auto& doc : corpus.documents) {
    term_lists.push_back(preprocess(doc.document, config.pipeline, stoplist));
    total_tokens += term_lists.back().size();
  }
  const Vocabulary vocab = build_vocabulary(term_lists);

  const fs::path out = config.output_dir;
  write_file(out / "vocabulary.tsv", dump_vocabulary(vocab));

  std::string report;
  report += "documents: " + std::to_string(corpus.size()) + "\n";
  report += "terms after preprocessing: " + std::to_string(total_tokens) +
            "\n";
  report += "vocabulary size: " + std::to_string(vocab.size()) + "\n";
  report += "vocabulary checksum: " + vocab.checksum() + "\n";
  report += "class distribution:\n";
  for (const auto& [type, count] : class_distribution(corpus)) {
    char line[96];
    std::snprintf(line, sizeof line, "  %-22s %zu\n",
                  std::string(to_label(type)).c_str(), count);
    report += line;
  }
  write_file(out / "prep_report.txt", report);
  std::cout << report;
  return 0;
}

int cmd_train(const RunConfig& config) {
  const Corpus corpus = load_corpus_checked(config);
  const StopList stoplist = load_stoplist(config, corpus.registry);

  if (config.prune) {
    for (const auto& [type, count] : class_distribution(corpus)) {
      if (count == 1) {
        throw ConfigError(
            "corpus too small: class " + std::string(to_label(type)) +
            " has a single document; pruning needs at least 2 per observed "
            "class (or set prune = false)");
      }
    }
  }

  log_verbose(config, "training on " + std::to_string(corpus.size()) +
                          " documents");
  const TrainedPipeline trained =
      train_pipeline(corpus.documents, stoplist, config.train_options());

  const fs::path out = config.output_dir;
  save_model(trained.model, out / "model.txt");
  write_file(out / "vocabulary.tsv", dump_vocabulary(trained.vocabulary));

  const EvalReport self = verify(trained.model, trained.vocabulary,
                                 corpus.documents, config.pipeline, stoplist,
                                 config.weighting);
  std::string report = "model\n-----\n";
  report += model_summary(trained.model, trained.selected_features.size());
  char line[96];
  std::snprintf(line, sizeof line,
                "\ntraining-set accuracy (diagnostic): %.2f%%\n",
                100.0 * self.accuracy);
  report += line;

  if (config.cv_folds >= 2 && corpus.size() >= config.cv_folds) {
    log_verbose(config, std::to_string(config.cv_folds) +
                            "-fold cross-validation");
    const EvalReport cv =
        cross_validate(corpus.documents, stoplist, config.train_options(),
                       config.cv_folds, config.seed);
    report += "\n" + std::to_string(config.cv_folds) +
              "-fold cross-validation\n----------------------\n";
    report += format_report(cv);
  }
  write_file(out / "train_report.txt", report);
  std::cout << report;
  return 0;
}

int cmd_evaluate(const RunConfig& config) {
  const fs::path out = config.output_dir;
  std::string report;
  if (!config.model_path.empty()) {
    // Held-out verification of an existing model.
    auto [model, vocab] = load_model_checked(config);
    const std::string test_path = config.test_corpus_path.empty()
                                      ? config.corpus_path
                                      : config.test_corpus_path;
    RunConfig test_config = config;
    test_config.corpus_path = test_path;
    const Corpus test = load_corpus_checked(test_config);
    const StopList stoplist = load_stoplist(config, test.registry);
    const EvalReport verified = verify(model, vocab, test.documents,
                                       config.pipeline, stoplist,
                                       config.weighting);
    report = "verification\n------------\n" + format_report(verified);
  } else {
    const Corpus corpus = load_corpus_checked(config);
    const StopList stoplist = load_stoplist(config, corpus.registry);
    const EvalReport cv =
        cross_validate(corpus.documents, stoplist, config.train_options(),
                       config.cv_folds, config.seed);
    report = std::to_string(config.cv_folds) +
             "-fold cross-validation\n----------------------\n" +
             format_report(cv);
  }
  write_file(out / "eval_report.txt", report);
  std::cout << report;
  return 0;
}

int cmd_classify(const RunConfig& config) {
  auto [model, vocab] = load_model_checked(config);
  require_path(config.pages_path, "pages");
  const Registry registry = load_registry_checked(config);
  const StopList stoplist = load_stoplist(config, registry);
  const std::vector<Document> pages = load_documents(config.pages_path);

  const fs::path out = config.output_dir;
  std::ofstream predictions(out / "predictions.jsonl");
  if (!predictions) {
    throw RuntimeError("cannot write " +
                       (out / "predictions.jsonl").string());
  }
  for (const auto& doc : pages) {
    const PageType predicted =
        predict(model, vectorize_document(doc, config.pipeline, stoplist,
                                          vocab, config.weighting));
    nlohmann::ordered_json row;
    row["id"] = doc.id;
    row["url"] = doc.url;
    row["predicted"] = std::string(to_label(predicted));
    predictions << row.dump() << '\n';
  }
  std::cout << "classified " << pages.size() << " pages\n";
  return 0;
}

int cmd_links(const RunConfig& config) {
  auto [model, vocab] = load_model_checked(config);
  require_path(config.links_path, "links");
  require_path(config.motivations_path, "motivations");
  const Registry registry = load_registry_checked(config);
  const StopList stoplist = load_stoplist(config, registry);
  const MotivationTable table =
      MotivationTable::load(config.motivations_path);
  const std::vector<LinkRecord> records = load_links(config.links_path);
  if (records.empty()) {
    std::cerr << "unilink: warning: " << config.links_path
              << " holds no link records; outputs will be empty\n";
  }

  const ClassifierContext context{model, vocab, config.pipeline, stoplist,
                                  config.weighting};
  std::vector<ClassifiedLink> classified;
  classified.reserve(records.size());
  for (const auto& record : records) {
    classified.push_back(classify_link(record, context, table));
  }

  const fs::path out = config.output_dir;
  {
    std::ofstream stream(out / "links_classified.jsonl");
    if (!stream) {
      throw RuntimeError("cannot write " +
                         (out / "links_classified.jsonl").string());
    }
    for (const auto& link : classified) {
      nlohmann::ordered_json row;
      row["source_url"] = link.record.source_url;
      row["target_url"] = link.record.target_url;
      row["source_institution"] = link.record.source_institution;
      row["target_institution"] = link.record.target_institution;
      row["seq"] = link.record.seq;
      row["source_type"] = std::string(to_label(link.source_type));
      row["target_type"] = std::string(to_label(link.target_type));
      row["motivations"] = nlohmann::ordered_json::array();
      for (MotivationLabel label : link.motivations) {
        row["motivations"].push_back(std::string(motivation_name(label)));
      }
      row["scholarly"] = std::string(scholarliness_name(link.scholarly));
      row["target_from_url_only"] = link.target_from_url_only;
      stream << row.dump() << '\n';
    }
  }

  // Page-share observations: both endpoints of every link (targets are
  // URL-classified only, same caveat as the records themselves).
  std::vector<PageType> observations;
  observations.reserve(2 * classified.size());
  for (const auto& link : classified) {
    observations.push_back(link.source_type);
    observations.push_back(link.target_type);
  }
  const InterlinkMatrix matrix = aggregate(classified, observations);
  write_file(out / "interlink.dot", export_graph(matrix, GraphFormat::DOT));
  write_file(out / "interlink.json", export_graph(matrix, GraphFormat::JSON));
  write_file(out / "interlink.csv", export_graph(matrix, GraphFormat::CSV));

  const std::vector<ClassifiedLink> scholarly =
      filter_scholarly(classified, config.keep_mixed);
  std::vector<PageType> scholarly_observations;
  scholarly_observations.reserve(2 * scholarly.size());
  for (const auto& link : scholarly) {
    scholarly_observations.push_back(link.source_type);
    scholarly_observations.push_back(link.target_type);
  }
  const InterlinkMatrix scholarly_matrix =
      aggregate(scholarly, scholarly_observations);
  write_file(out / "interlink_scholarly.dot",
             export_graph(scholarly_matrix, GraphFormat::DOT));
  write_file(out / "interlink_scholarly.csv",
             export_graph(scholarly_matrix, GraphFormat::CSV));

  std::string summary;
  summary += "links classified: " + std::to_string(classified.size()) + "\n";
  summary += "scholarly filter kept: " + std::to_string(scholarly.size()) +
             (config.keep_mixed ? " (mixed links retained)\n"
                                : " (mixed links dropped)\n");
  summary +=
      "target types rest on URL tokens only; treat them as lower "
      "confidence\n";
  write_file(out / "links_summary.txt", summary);
  std::cout << summary;
  return 0;
}

int cmd_report(const RunConfig& config) {
  const Corpus corpus = load_corpus_checked(config);
  const StopList stoplist = load_stoplist(config, corpus.registry);
  const fs::path out = config.output_dir;

  const EvalReport cv =
      cross_validate(corpus.documents, stoplist, config.train_options(),
                     config.cv_folds, config.seed);

  std::string report;
  report += std::to_string(config.cv_folds) +
            "-fold cross-validation\n----------------------\n";
  report += format_report(cv);
  report += "\nclass distribution\n------------------\n";
  const auto distribution = class_distribution(corpus);
  for (const auto& [type, count] : distribution) {
    char line[96];
    std::snprintf(line, sizeof line, "  %-22s %6zu  (%.4f)\n",
                  std::string(to_label(type)).c_str(), count,
                  static_cast<double>(count) /
                      static_cast<double>(corpus.size()));
    report += line;
  }
  write_file(out / "report.txt", report);

  std::string sweep = "k,accuracy\n";
  for (std::size_t k : config.sweep_k) {
    TrainOptions options = config.train_options();
    options.feature_k = k;
    const EvalReport result = cross_validate(
        corpus.documents, stoplist, options, config.cv_folds, config.seed);
    char line[64];
    std::snprintf(line, sizeof line, "%zu,%.4f\n", k, result.accuracy);
    sweep += line;
  }
  write_file(out / "sweep.csv", sweep);

  std::cout << report;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "unilink: page-type classification and interlink analysis for "
      "institutional webs"};
  app.require_subcommand(1);

  struct SubcommandFlags {
    std::string config_path;
    std::vector<std::pair<std::string, CLI::Option*>> options;
  };
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"crawl", "Crawl one institution and record inter-institution links"},
      {"prep", "Preprocess a corpus and dump its vocabulary"},
      {"train", "Train a page-type model"},
      {"evaluate", "Cross-validate, or verify an existing model"},
      {"classify", "Classify unlabeled pages with a trained model"},
      {"links", "Classify link endpoints and export interlink graphs"},
      {"report", "Evaluation tables, feature-size sweep, class distribution"},
  };
  std::map<std::string, SubcommandFlags> flags;
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    SubcommandFlags& f = flags[name];
    sub->add_option("--config", f.config_path,
                    "Config file (key = value lines under [sections])");
    for (const auto& key : config_keys()) {
      CLI::Option* option = sub->add_option("--" + key);
      option->description("Overrides config key '" + key + "'");
      option->expected(1);
      f.options.emplace_back(key, option);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const SubcommandFlags& f = flags[command];
  try {
    RunConfig config;
    if (!f.config_path.empty()) {
      load_config_file(config, f.config_path);
    }
    for (const auto& [key, option] : f.options) {
      if (option->count() > 0) {
        apply_config_key(config, key, option->results().back());
      }
    }
    if (!config.pipeline.valid()) {
      throw ConfigError(
          "at least one of use_title and use_url must stay enabled");
    }

    OutputLock lock{fs::path(config.output_dir)};
    if (command == "crawl") return cmd_crawl(config);
    if (command == "prep") return cmd_prep(config);
    if (command == "train") return cmd_train(config);
    if (command == "evaluate") return cmd_evaluate(config);
    if (command == "classify") return cmd_classify(config);
    if (command == "links") return cmd_links(config);
    if (command == "report") return cmd_report(config);
    throw ConfigError("unknown command " + command);
  } catch (const ParseError& e) {
    std::cerr << "unilink: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "unilink: " << e.what() << "\n";
    return 2;
  } catch (const RuntimeError& e) {
    std::cerr << "unilink: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unilink: " << e.what() << "\n";
    return 1;
  }
}
