#include "unilink/linkmap.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

#include "unilink/errors.hpp"

namespace unilink {

namespace {

constexpr std::array<std::string_view, 9> kMotivationNames = {
    "Navigational",
    "Ownership",
    "Social",
    "Gratuitous",
    "ResourceAcknowledgement",
    "CollaborationCoauthorship",
    "GeographicProximity",
    "CourseReference",
    "Unclassified",
};

constexpr std::array<std::string_view, 3> kScholarlinessNames = {
    "scholarly",
    "non-scholarly",
    "mixed",
};

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string_view motivation_name(MotivationLabel label) {
  return kMotivationNames[static_cast<std::size_t>(label)];
}

std::optional<MotivationLabel> parse_motivation(std::string_view name) {
  for (std::size_t i = 0; i < kMotivationNames.size(); ++i) {
    if (kMotivationNames[i] == name) {
      return static_cast<MotivationLabel>(i);
    }
  }
  return std::nullopt;
}

std::string_view scholarliness_name(Scholarliness value) {
  return kScholarlinessNames[static_cast<std::size_t>(value)];
}

std::optional<Scholarliness> parse_scholarliness(std::string_view name) {
  for (std::size_t i = 0; i < kScholarlinessNames.size(); ++i) {
    if (kScholarlinessNames[i] == name) {
      return static_cast<Scholarliness>(i);
    }
  }
  return std::nullopt;
}

MotivationTable MotivationTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open motivation table " + path.string());
  MotivationTable table;
  std::array<std::array<bool, kPageTypeCount>, kPageTypeCount> listed{};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                             line.back() == '\t')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError(path.string(), line_no,
                       "expected source<TAB>target<TAB>motivations<TAB>flag");
    }
    const auto source = parse_page_type(fields[0]);
    const auto target = parse_page_type(fields[1]);
    if (!source || !target) {
      throw ParseError(path.string(), line_no,
                       "unknown page type '" +
                           (source ? fields[1] : fields[0]) + "'");
    }
    if (listed[index_of(*source)][index_of(*target)]) {
      throw ParseError(path.string(), line_no,
                       "duplicate pair " + fields[0] + " -> " + fields[1]);
    }
    listed[index_of(*source)][index_of(*target)] = true;
    MotivationEntry entry;
    entry.motivations.clear();
    for (const auto& name : split(fields[2], ',')) {
      const auto motivation = parse_motivation(name);
      if (!motivation) {
        throw ParseError(path.string(), line_no,
                         "unknown motivation '" + name + "'");
      }
      entry.motivations.insert(*motivation);
    }
    if (entry.motivations.empty()) {
      throw ParseError(path.string(), line_no, "empty motivation list");
    }
    const auto flag = parse_scholarliness(fields[3]);
    if (!flag) {
      throw ParseError(path.string(), line_no,
                       "unknown scholarly flag '" + fields[3] +
                           "' (scholarly | non-scholarly | mixed)");
    }
    entry.scholarly = *flag;
    table.entries[index_of(*source)][index_of(*target)] = std::move(entry);
  }
  return table;
}

ClassifiedLink classify_link(const LinkRecord& record,
                             const ClassifierContext& context,
                             const MotivationTable& table) {
  if (context.model.vocab_checksum != context.vocab_checksum) {
    throw RuntimeError(
        "vocabulary mismatch: the model was trained against a different "
        "vocabulary");
  }
  ClassifiedLink link;
  link.record = record;

  Document source{record.source_url, record.source_url,
                  record.source_institution, record.source_title, {}};
  link.source_type = predict(
      context.model, vectorize_document(source, context.config,
                                        context.stoplist, context.vocab,
                                        context.weighting));

  Document target{record.target_url, record.target_url,
                  record.target_institution, "", {}};
  link.target_type = predict(
      context.model, vectorize_document(target, context.config,
                                        context.stoplist, context.vocab,
                                        context.weighting));
  link.target_from_url_only = true;

  const MotivationEntry& entry = table.lookup(link.source_type,
                                              link.target_type);
  link.motivations = entry.motivations;
  link.scholarly = entry.scholarly;
  return link;
}

std::size_t InterlinkMatrix::total() const {
  std::size_t sum = 0;
  for (const auto& row : counts) {
    for (std::size_t c : row) sum += c;
  }
  return sum;
}

std::array<double, kPageTypeCount> InterlinkMatrix::row_fractions(
    PageType source) const {
  const auto& row = counts[index_of(source)];
  std::size_t row_total = 0;
  for (std::size_t c : row) row_total += c;
  std::array<double, kPageTypeCount> fractions{};
  if (row_total == 0) return fractions;
  for (std::size_t t = 0; t < kPageTypeCount; ++t) {
    fractions[t] = static_cast<double>(row[t]) / static_cast<double>(row_total);
  }
  return fractions;
}

InterlinkMatrix aggregate(const std::vector<ClassifiedLink>& links,
                          const std::vector<PageType>& page_observations) {
  InterlinkMatrix matrix;
  for (const auto& link : links) {
    ++matrix.counts[index_of(link.source_type)][index_of(link.target_type)];
  }
  if (!page_observations.empty()) {
    std::array<std::size_t, kPageTypeCount> seen{};
    for (PageType type : page_observations) ++seen[index_of(type)];
    for (std::size_t i = 0; i < kPageTypeCount; ++i) {
      matrix.page_share[i] = static_cast<double>(seen[i]) /
                             static_cast<double>(page_observations.size());
    }
  }
  return matrix;
}

std::vector<ClassifiedLink> filter_scholarly(
    const std::vector<ClassifiedLink>& links, bool keep_mixed) {
  std::vector<ClassifiedLink> kept;
  for (const auto& link : links) {
    if (link.scholarly == Scholarliness::Scholarly ||
        (keep_mixed && link.scholarly == Scholarliness::Mixed)) {
      kept.push_back(link);
    }
  }
  return kept;
}

std::optional<GraphFormat> parse_graph_format(std::string_view name) {
  if (name == "dot") return GraphFormat::DOT;
  if (name == "json") return GraphFormat::JSON;
  if (name == "csv") return GraphFormat::CSV;
  return std::nullopt;
}

std::string export_graph(const InterlinkMatrix& matrix, GraphFormat format) {
  switch (format) {
    case GraphFormat::DOT: {
      std::string out = "digraph interlinking {\n";
      for (PageType type : all_page_types()) {
        out += "  " + std::string(to_label(type)) +
               " [weight=" + format_double(matrix.page_share[index_of(type)]) +
               "];\n";
      }
      for (PageType source : all_page_types()) {
        const auto fractions = matrix.row_fractions(source);
        for (PageType target : all_page_types()) {
          const std::size_t count =
              matrix.counts[index_of(source)][index_of(target)];
          if (count == 0) continue;
          out += "  " + std::string(to_label(source)) + " -> " +
                 std::string(to_label(target)) +
                 " [weight=" + format_double(fractions[index_of(target)]) +
                 ", count=" + std::to_string(count) + "];\n";
        }
      }
      out += "}\n";
      return out;
    }
    case GraphFormat::JSON: {
      nlohmann::ordered_json doc;
      doc["nodes"] = nlohmann::ordered_json::array();
      for (PageType type : all_page_types()) {
        doc["nodes"].push_back({{"type", std::string(to_label(type))},
                                {"share", matrix.page_share[index_of(type)]}});
      }
      doc["edges"] = nlohmann::ordered_json::array();
      for (PageType source : all_page_types()) {
        const auto fractions = matrix.row_fractions(source);
        for (PageType target : all_page_types()) {
          const std::size_t count =
              matrix.counts[index_of(source)][index_of(target)];
          doc["edges"].push_back(
              {{"source", std::string(to_label(source))},
               {"target", std::string(to_label(target))},
               {"count", count},
               {"row_fraction", fractions[index_of(target)]}});
        }
      }
      return doc.dump(2) + "\n";
    }
    case GraphFormat::CSV: {
      std::string out = "source,target,count,row_fraction,source_share\n";
      for (PageType source : all_page_types()) {
        const auto fractions = matrix.row_fractions(source);
        for (PageType target : all_page_types()) {
          out += std::string(to_label(source)) + "," +
                 std::string(to_label(target)) + "," +
                 std::to_string(
                     matrix.counts[index_of(source)][index_of(target)]) +
                 "," + format_double(fractions[index_of(target)]) + "," +
                 format_double(matrix.page_share[index_of(source)]) + "\n";
        }
      }
      return out;
    }
  }
  throw ConfigError("unknown graph format");
}

}  // namespace unilink
