#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "unilink/crawler.hpp"
#include "unilink/dtree.hpp"
#include "unilink/pipeline.hpp"

namespace unilink {

// Why a link from one page type to another tends to exist. The first four
// follow the classic four-category link taxonomy; the rest name the
// finer-grained reasons observed per page-type pair.
enum class MotivationLabel : std::uint8_t {
  Navigational,
  Ownership,
  Social,
  Gratuitous,
  ResourceAcknowledgement,
  CollaborationCoauthorship,
  GeographicProximity,
  CourseReference,
  Unclassified,
};

std::string_view motivation_name(MotivationLabel label);
std::optional<MotivationLabel> parse_motivation(std::string_view name);

enum class Scholarliness : std::uint8_t { Scholarly, NonScholarly, Mixed };

std::string_view scholarliness_name(Scholarliness value);
std::optional<Scholarliness> parse_scholarliness(std::string_view name);

struct MotivationEntry {
  std::set<MotivationLabel> motivations{MotivationLabel::Unclassified};
  Scholarliness scholarly = Scholarliness::Mixed;

  bool operator==(const MotivationEntry&) const = default;
};

// Total over all 64 ordered (source, target) pairs: pairs a loaded file does
// not list keep the Unclassified/mixed default.
struct MotivationTable {
  std::array<std::array<MotivationEntry, kPageTypeCount>, kPageTypeCount>
      entries{};

  const MotivationEntry& lookup(PageType source, PageType target) const {
    return entries[index_of(source)][index_of(target)];
  }

  // Line format: source<TAB>target<TAB>comma-joined motivations<TAB>flag,
  // '#' comments. Duplicate pairs are rejected.
  static MotivationTable load(const std::filesystem::path& path);
};

struct ClassifiedLink {
  LinkRecord record;
  PageType source_type = PageType::About;
  PageType target_type = PageType::About;
  std::set<MotivationLabel> motivations;
  Scholarliness scholarly = Scholarliness::Mixed;
  // Targets are never crawled, so their classification rests on URL tokens
  // alone; reports surface this.
  bool target_from_url_only = true;
};

// Trained artifacts a link classification run needs. The checksum is cached
// so bulk runs validate the model-vocabulary pairing once per link cheaply.
struct ClassifierContext {
  const DecisionTreeModel& model;
  const Vocabulary& vocab;
  PipelineConfig config;
  const StopList& stoplist;
  WeightingScheme weighting = WeightingScheme::TF;
  std::string vocab_checksum;

  ClassifierContext(const DecisionTreeModel& model_in,
                    const Vocabulary& vocab_in, PipelineConfig config_in,
                    const StopList& stoplist_in, WeightingScheme weighting_in)
      : model(model_in),
        vocab(vocab_in),
        config(std::move(config_in)),
        stoplist(stoplist_in),
        weighting(weighting_in),
        vocab_checksum(vocab_in.checksum()) {}
};

// Source classified from title + URL, target from URL only; motivations and
// the scholarly flag looked up from the table.
ClassifiedLink classify_link(const LinkRecord& record,
                             const ClassifierContext& context,
                             const MotivationTable& table);

struct InterlinkMatrix {
  std::array<std::array<std::size_t, kPageTypeCount>, kPageTypeCount>
      counts{};
  std::array<double, kPageTypeCount> page_share{};

  std::size_t total() const;
  // counts[source][t] / row total; all zeros for an empty row.
  std::array<double, kPageTypeCount> row_fractions(PageType source) const;
};

InterlinkMatrix aggregate(const std::vector<ClassifiedLink>& links,
                          const std::vector<PageType>& page_observations);

// Keeps scholarly links, drops non-scholarly ones; mixed links stay when
// keep_mixed is set (the default).
std::vector<ClassifiedLink> filter_scholarly(
    const std::vector<ClassifiedLink>& links, bool keep_mixed = true);

enum class GraphFormat { DOT, JSON, CSV };

std::optional<GraphFormat> parse_graph_format(std::string_view name);

// DOT: one node per page type (weight = page share), arcs for non-zero cells
// (weight = row fraction, count attached). JSON and CSV carry every cell plus
// the shares, losslessly.
std::string export_graph(const InterlinkMatrix& matrix, GraphFormat format);

}  // namespace unilink
