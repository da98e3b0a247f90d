#include <fcntl.h>
#include <sys/file.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"
#include "unilink/config.hpp"
#include "unilink/corpus.hpp"
#include "unilink/crawler.hpp"
#include "unilink/errors.hpp"

using namespace unilink;
using unilink::testsupport::read_file;
using unilink::testsupport::synthetic_corpus;
using unilink::testsupport::TempDir;
using unilink::testsupport::write_file;

namespace {

std::size_t count_lines(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  return lines;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args,
                  const std::filesystem::path& scratch) {
  const auto out_path = scratch / "stdout.txt";
  const auto err_path = scratch / "stderr.txt";
  const std::string command = std::string(UNILINK_CLI_PATH) + " " + args +
                              " > " + out_path.string() + " 2> " +
                              err_path.string();
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  return result;
}

// Registry, labeled corpus and stop list on disk, ready for CLI runs.
struct CliFixture {
  TempDir dir{"cli"};
  std::string registry;
  std::string corpus;
  std::string stoplist;

  CliFixture() {
    unilink::testsupport::SyntheticOptions options;
    options.docs_per_class = 12;
    options.seed = 5;
    const Corpus c = synthetic_corpus(options);
    registry = (dir.path / "registry.jsonl").string();
    corpus = (dir.path / "corpus.jsonl").string();
    save_registry(c.registry, dir.path / "registry.jsonl");
    save_corpus(c, dir.path / "corpus.jsonl");
    stoplist =
        write_file(dir.path, "stopwords.txt", "the\nof\na\nan\nand\nac\nuk\n")
            .string();
  }

  std::string base_flags(const std::string& out_dir) const {
    return "--registry " + registry + " --corpus " + corpus + " --stoplist " +
           stoplist + " --output_dir " + out_dir;
  }

  std::filesystem::path out(const std::string& name) const {
    return dir.path / name;
  }
};

}  // namespace

TEST_CASE("run config defaults") {
  const RunConfig config;
  CHECK(config.pipeline.use_title);
  CHECK(config.pipeline.use_url);
  CHECK(config.pipeline.use_stemming);
  CHECK(config.pipeline.use_stopwords);
  CHECK(config.pipeline.ngram_mode == NgramMode::UnigramsOnly);
  CHECK(config.weighting == WeightingScheme::TF);
  CHECK(config.criterion == SplitCriterion::Entropy);
  CHECK(config.feature_k == 250);
  CHECK(config.prune);
  CHECK(config.restrict_retrain);
  CHECK(config.cv_folds == 10);
  CHECK(config.seed == 7);
  CHECK(config.miss_threshold == 2000);
  CHECK_FALSE(config.max_pages.has_value());
  CHECK(config.sweep_k == std::vector<std::size_t>{10, 50, 100, 250, 500,
                                                   1000});
  CHECK(config.keep_mixed);
}

TEST_CASE("config keys parse and validate") {
  RunConfig config;

  for (const std::string value : {"true", "1", "yes", "on"}) {
    apply_config_key(config, "prune", value);
    CHECK(config.prune);
    apply_config_key(config, "prune", "false");
  }
  for (const std::string value : {"false", "0", "no", "off"}) {
    apply_config_key(config, "verbose", value);
    CHECK_FALSE(config.verbose);
  }
  CHECK_THROWS_AS(apply_config_key(config, "prune", "maybe"), ConfigError);

  apply_config_key(config, "feature_k", "42");
  CHECK(config.feature_k == 42);
  CHECK_THROWS_AS(apply_config_key(config, "feature_k", "-3"), ConfigError);
  CHECK_THROWS_AS(apply_config_key(config, "feature_k", "12abc"),
                  ConfigError);

  apply_config_key(config, "min_gain", "0.25");
  CHECK(config.tree.min_gain == 0.25);
  CHECK_THROWS_AS(apply_config_key(config, "min_gain", "tiny"), ConfigError);

  apply_config_key(config, "max_depth", "4");
  CHECK(config.tree.max_depth == 4);
  apply_config_key(config, "max_depth", "none");
  CHECK_FALSE(config.tree.max_depth.has_value());

  CHECK_THROWS_AS(apply_config_key(config, "min_leaf", "0"), ConfigError);
  CHECK_THROWS_AS(apply_config_key(config, "miss_threshold", "0"),
                  ConfigError);

  apply_config_key(config, "ngrams", "bigrams");
  CHECK(config.pipeline.ngram_mode == NgramMode::BigramsPlusUnigrams);
  CHECK_THROWS_AS(apply_config_key(config, "ngrams", "trigrams"),
                  ConfigError);

  apply_config_key(config, "weighting", "tfidf");
  CHECK(config.weighting == WeightingScheme::TFIDF);
  CHECK_THROWS_AS(apply_config_key(config, "weighting", "binary"),
                  ConfigError);

  apply_config_key(config, "criterion", "gini");
  CHECK(config.criterion == SplitCriterion::Gini);
  CHECK_THROWS_AS(apply_config_key(config, "criterion", "banana"),
                  ConfigError);

  apply_config_key(config, "sweep_k", "10, 250");
  CHECK(config.sweep_k == std::vector<std::size_t>{10, 250});
  CHECK_THROWS_AS(apply_config_key(config, "sweep_k", " , "), ConfigError);

  apply_config_key(config, "model", "artifacts/model.txt");
  CHECK(config.model_path == "artifacts/model.txt");

  CHECK_THROWS_AS(apply_config_key(config, "mystery", "1"), ConfigError);

  const auto& keys = config_keys();
  CHECK(keys.size() == 36);
  for (const char* key : {"feature_k", "criterion", "sweep_k", "corpus"}) {
    CHECK(std::find(keys.begin(), keys.end(), key) != keys.end());
  }
}

TEST_CASE("train options mirror the config") {
  RunConfig config;
  apply_config_key(config, "criterion", "gini");
  apply_config_key(config, "feature_k", "33");
  apply_config_key(config, "prune", "false");
  apply_config_key(config, "seed", "99");
  apply_config_key(config, "min_leaf", "3");
  const TrainOptions options = config.train_options();
  CHECK(options.criterion == SplitCriterion::Gini);
  CHECK(options.feature_k == 33);
  CHECK_FALSE(options.prune);
  CHECK(options.seed == 99);
  CHECK(options.tree.min_leaf == 3);
}

TEST_CASE("config files use sections comments and key value lines") {
  TempDir dir("config");
  const auto path = write_file(dir.path, "run.ini",
                               "# full knob file\n"
                               "[pipeline]\n"
                               "stemming = false\n"
                               "ngrams = bigrams   ; inline comment\n"
                               "\n"
                               "[select]\n"
                               "feature_k = 77\n"
                               "[crawl]\n"
                               "max_pages = 500\n");
  RunConfig config;
  load_config_file(config, path);
  CHECK_FALSE(config.pipeline.use_stemming);
  CHECK(config.pipeline.ngram_mode == NgramMode::BigramsPlusUnigrams);
  CHECK(config.feature_k == 77);
  CHECK(config.max_pages == 500);

  // Later sources win: file over defaults, then direct keys over the file.
  apply_config_key(config, "feature_k", "30");
  CHECK(config.feature_k == 30);

  const auto check_error = [&](const std::string& name,
                               const std::string& content,
                               const std::string& needle) {
    const auto bad = write_file(dir.path, name, content);
    RunConfig fresh;
    try {
      load_config_file(fresh, bad);
      FAIL("expected ConfigError from " << name);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  check_error("unknown-section.ini", "[magic]\n", "unknown section");
  check_error("unterminated.ini", "[pipeline\n", "unterminated");
  check_error("no-equals.ini", "[pipeline]\nstemming\n", ":2:");
  check_error("bad-key.ini", "[run]\nmystery = 1\n", "mystery");
  check_error("bad-value.ini", "[tree]\nmin_leaf = zero\n", ":2:");

  RunConfig fresh;
  CHECK_THROWS_AS(load_config_file(fresh, dir.path / "absent.ini"),
                  ConfigError);
}

TEST_CASE("cli rejects bad invocations") {
  TempDir dir("badcli");
  CHECK(run_cli("", dir.path).exit_code == 2);
  CHECK(run_cli("conquer", dir.path).exit_code == 2);

  const std::string out_dir = (dir.path / "out").string();
  const auto missing = run_cli("train --output_dir " + out_dir, dir.path);
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.find("corpus") != std::string::npos);

  CHECK(run_cli("train --criterion banana --output_dir " + out_dir,
                dir.path).exit_code == 2);
  CHECK(run_cli("train --config " + (dir.path / "absent.ini").string() +
                    " --output_dir " + out_dir,
                dir.path).exit_code == 2);

  const auto no_sources =
      run_cli("train --use_title false --use_url false --output_dir " +
                  out_dir,
              dir.path);
  CHECK(no_sources.exit_code == 2);
  CHECK(no_sources.err.find("use_title") != std::string::npos);
}

TEST_CASE("cli train writes reproducible artifacts") {
  CliFixture fixture;
  const std::string first_dir = fixture.out("first").string();
  const std::string second_dir = fixture.out("second").string();
  const std::string flags = " --cv_folds 0 --seed 21";

  const auto first =
      run_cli("train " + fixture.base_flags(first_dir) + flags, fixture.dir.path);
  REQUIRE(first.exit_code == 0);
  CHECK(first.out.find("nodes: ") != std::string::npos);
  CHECK(std::filesystem::exists(fixture.out("first") / "model.txt"));
  CHECK(std::filesystem::exists(fixture.out("first") / "vocabulary.tsv"));
  CHECK(std::filesystem::exists(fixture.out("first") / "train_report.txt"));

  const auto second = run_cli("train " + fixture.base_flags(second_dir) + flags,
                              fixture.dir.path);
  REQUIRE(second.exit_code == 0);
  CHECK(read_file(fixture.out("first") / "model.txt") ==
        read_file(fixture.out("second") / "model.txt"));
  CHECK(read_file(fixture.out("first") / "vocabulary.tsv") ==
        read_file(fixture.out("second") / "vocabulary.tsv"));
}

TEST_CASE("cli flags reach the tree grower") {
  CliFixture fixture;
  const std::string out_dir = fixture.out("stump").string();
  const auto result = run_cli(
      "train " + fixture.base_flags(out_dir) +
          " --cv_folds 0 --max_depth 1 --prune false",
      fixture.dir.path);
  REQUIRE(result.exit_code == 0);

  // Depth capped at one: a root decision and its two leaves.
  const std::string model = read_file(fixture.out("stump") / "model.txt");
  const auto body = model.find("tree\n");
  REQUIRE(body != std::string::npos);
  CHECK(count_lines(model.substr(body + 5)) == 3);
}

TEST_CASE("cli precedence is defaults then file then flags") {
  CliFixture fixture;
  const std::string out_dir = fixture.out("precedence").string();
  const auto config_path = write_file(fixture.dir.path, "run.ini",
                                      "[select]\n"
                                      "feature_k = 10\n"
                                      "[tree]\n"
                                      "criterion = gini\n"
                                      "[eval]\n"
                                      "cv_folds = 0\n");
  const auto result = run_cli("train " + fixture.base_flags(out_dir) +
                                  " --config " + config_path.string() +
                                  " --feature_k 30",
                              fixture.dir.path);
  REQUIRE(result.exit_code == 0);
  const std::string report =
      read_file(fixture.out("precedence") / "train_report.txt");
  CHECK(report.find("criterion: gini") != std::string::npos);
  CHECK(report.find("features selected: 30") != std::string::npos);
}

TEST_CASE("cli evaluate verifies a model or cross-validates") {
  CliFixture fixture;
  const std::string train_dir = fixture.out("model").string();
  REQUIRE(run_cli("train " + fixture.base_flags(train_dir) + " --cv_folds 0",
                  fixture.dir.path)
              .exit_code == 0);

  const std::string verify_dir = fixture.out("verify").string();
  const auto verified = run_cli(
      "evaluate " + fixture.base_flags(verify_dir) + " --model " + train_dir +
          "/model.txt --vocab " + train_dir + "/vocabulary.tsv",
      fixture.dir.path);
  REQUIRE(verified.exit_code == 0);
  CHECK(verified.out.rfind("verification", 0) == 0);
  CHECK(verified.out.find("accuracy: ") != std::string::npos);

  const std::string cv_dir = fixture.out("cv").string();
  const auto crossed = run_cli(
      "evaluate " + fixture.base_flags(cv_dir) + " --cv_folds 4",
      fixture.dir.path);
  REQUIRE(crossed.exit_code == 0);
  CHECK(crossed.out.rfind("4-fold cross-validation", 0) == 0);
  CHECK(std::filesystem::exists(fixture.out("cv") / "eval_report.txt"));
}

TEST_CASE("cli report sweeps the feature count") {
  CliFixture fixture;
  const std::string out_dir = fixture.out("report").string();
  const auto result = run_cli("report " + fixture.base_flags(out_dir) +
                                  " --cv_folds 2 --sweep_k 10,250",
                              fixture.dir.path);
  REQUIRE(result.exit_code == 0);
  const std::string sweep = read_file(fixture.out("report") / "sweep.csv");
  CHECK(sweep.rfind("k,accuracy\n", 0) == 0);
  CHECK(count_lines(sweep) == 3);
  CHECK(sweep.find("10,") != std::string::npos);
  CHECK(sweep.find("250,") != std::string::npos);
  CHECK(std::filesystem::exists(fixture.out("report") / "report.txt"));
}

TEST_CASE("cli classify labels unlabeled pages") {
  CliFixture fixture;
  const std::string train_dir = fixture.out("model").string();
  REQUIRE(run_cli("train " + fixture.base_flags(train_dir) + " --cv_folds 0",
                  fixture.dir.path)
              .exit_code == 0);

  const std::vector<Document> pages{
      {"p1", "http://www.alpha.ac.uk/professor", "alpha", "Professor Smith",
       {}},
      {"p2", "http://www.alpha.ac.uk/syllabus", "alpha", "Module Syllabus",
       {}},
  };
  save_documents(pages, fixture.dir.path / "pages.jsonl");

  const std::string out_dir = fixture.out("classify").string();
  const auto result = run_cli(
      "classify " + fixture.base_flags(out_dir) + " --model " + train_dir +
          "/model.txt --vocab " + train_dir + "/vocabulary.tsv --pages " +
          (fixture.dir.path / "pages.jsonl").string(),
      fixture.dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(result.out == "classified 2 pages\n");

  const std::string predictions =
      read_file(fixture.out("classify") / "predictions.jsonl");
  REQUIRE(count_lines(predictions) == 2);
  std::size_t start = 0;
  for (int i = 0; i < 2; ++i) {
    const auto end = predictions.find('\n', start);
    const auto row = nlohmann::json::parse(predictions.substr(start, end - start));
    CHECK(row.at("id") == pages[static_cast<std::size_t>(i)].id);
    CHECK(parse_page_type(row.at("predicted").get<std::string>()).has_value());
    start = end + 1;
  }
}

TEST_CASE("cli links classifies endpoints and exports graphs") {
  CliFixture fixture;
  const std::string train_dir = fixture.out("model").string();
  REQUIRE(run_cli("train " + fixture.base_flags(train_dir) + " --cv_folds 0",
                  fixture.dir.path)
              .exit_code == 0);

  std::vector<LinkRecord> records;
  for (std::uint64_t i = 0; i < 4; ++i) {
    records.push_back(LinkRecord{
        "http://www.alpha.ac.uk/professor" + std::to_string(i),
        "http://www.beta.ac.uk/laboratory", "alpha", "beta",
        "Professor Profile", i});
  }
  save_links(records, fixture.dir.path / "links.jsonl");

  const std::string out_dir = fixture.out("links").string();
  const auto result = run_cli(
      "links " + fixture.base_flags(out_dir) + " --model " + train_dir +
          "/model.txt --vocab " + train_dir + "/vocabulary.tsv --links " +
          (fixture.dir.path / "links.jsonl").string() + " --motivations " +
          std::string(UNILINK_DATA_DIR) + "/motivations.tsv",
      fixture.dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(result.out.find("links classified: 4") != std::string::npos);

  const auto out_path = fixture.out("links");
  CHECK(count_lines(read_file(out_path / "links_classified.jsonl")) == 4);
  CHECK(count_lines(read_file(out_path / "interlink.csv")) == 65);
  CHECK(read_file(out_path / "interlink.dot").rfind("digraph", 0) == 0);
  CHECK(std::filesystem::exists(out_path / "interlink.json"));
  CHECK(std::filesystem::exists(out_path / "interlink_scholarly.csv"));
  CHECK(std::filesystem::exists(out_path / "links_summary.txt"));

  const auto first_row = nlohmann::json::parse(
      read_file(out_path / "links_classified.jsonl")
          .substr(0, read_file(out_path / "links_classified.jsonl").find('\n')));
  CHECK(first_row.at("target_from_url_only") == true);
  CHECK(parse_page_type(first_row.at("source_type").get<std::string>())
            .has_value());
}

TEST_CASE("cli crawl works against a directory fixture") {
  CliFixture fixture;
  const auto fixture_dir = fixture.dir.path / "site";
  std::filesystem::create_directories(fixture_dir);
  write_file(fixture_dir, "seed.html",
             "<title>Home</title>"
             "<a href=\"/leaf\">leaf</a>"
             "<a href=\"http://www.beta.ac.uk/x\">partner</a>");
  write_file(fixture_dir, "leaf.html", "<title>Leaf</title>");
  write_file(fixture_dir, "index.txt",
             "http://www.alpha.ac.uk/\tseed.html\ttext/html\n"
             "http://www.alpha.ac.uk/leaf\tleaf.html\n");

  const std::string out_dir = fixture.out("crawl").string();
  const auto result = run_cli(
      "crawl --registry " + fixture.registry + " --institution alpha"
      " --seed_url http://www.alpha.ac.uk/ --fixture_dir " +
          fixture_dir.string() + " --miss_threshold 5 --politeness_ms 0"
          " --output_dir " + out_dir,
      fixture.dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(result.out.find("pages fetched: 2") != std::string::npos);
  CHECK(result.out.find("inter-institution links: 1") != std::string::npos);
  CHECK(result.out.find("stop rule triggered: never") != std::string::npos);

  CHECK(load_documents(fixture.out("crawl") / "pages.jsonl").size() == 2);
  const auto links = load_links(fixture.out("crawl") / "links.jsonl");
  REQUIRE(links.size() == 1);
  CHECK(links[0].target_institution == "beta");
}

TEST_CASE("cli refuses an output directory another run holds") {
  TempDir dir("lock");
  const auto out_dir = dir.path / "out";
  std::filesystem::create_directories(out_dir);
  const int fd = ::open((out_dir / ".lock").c_str(), O_CREAT | O_RDWR, 0644);
  REQUIRE(fd >= 0);
  REQUIRE(::flock(fd, LOCK_EX | LOCK_NB) == 0);

  const auto result =
      run_cli("train --output_dir " + out_dir.string(), dir.path);
  CHECK(result.exit_code == 1);
  CHECK(result.err.find("in use") != std::string::npos);

  ::flock(fd, LOCK_UN);
  ::close(fd);
}
