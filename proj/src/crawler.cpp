#include "unilink/crawler.hpp"

#include <cctype>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "unilink/errors.hpp"
#include "unilink/html.hpp"

#ifdef UNILINK_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace unilink {

void MemoryFetcher::add(const std::string& url, std::string body,
                        std::string content_type) {
  pages_[url] = Page{std::move(body), std::move(content_type)};
}

FetchResult MemoryFetcher::fetch(const Url& url) {
  auto it = pages_.find(url.to_string());
  if (it == pages_.end()) return FetchResult{404, "", ""};
  return FetchResult{200, it->second.content_type, it->second.body};
}

FixtureFetcher FixtureFetcher::load(const std::filesystem::path& dir) {
  const auto index_path = dir / "index.txt";
  std::ifstream in(index_path);
  if (!in) {
    throw RuntimeError("cannot open fixture index " + index_path.string());
  }
  FixtureFetcher fetcher;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab1 = line.find('\t');
    if (tab1 == std::string::npos) {
      throw ParseError(index_path.string(), line_no,
                       "expected URL<TAB>filename");
    }
    const auto tab2 = line.find('\t', tab1 + 1);
    Entry entry;
    if (tab2 == std::string::npos) {
      entry.file = dir / line.substr(tab1 + 1);
      entry.content_type = "text/html";
    } else {
      entry.file = dir / line.substr(tab1 + 1, tab2 - tab1 - 1);
      entry.content_type = line.substr(tab2 + 1);
    }
    fetcher.entries_[line.substr(0, tab1)] = std::move(entry);
  }
  return fetcher;
}

FetchResult FixtureFetcher::fetch(const Url& url) {
  auto it = entries_.find(url.to_string());
  if (it == entries_.end()) return FetchResult{404, "", ""};
  std::ifstream in(it->second.file, std::ios::binary);
  if (!in) return FetchResult{404, "", ""};
  std::ostringstream body;
  body << in.rdbuf();
  return FetchResult{200, it->second.content_type, body.str()};
}

LiveFetcher::LiveFetcher(std::chrono::milliseconds per_host_delay)
    : delay_(per_host_delay) {}

bool LiveFetcher::allowed_by_robots(const Url& url) {
  auto rules = disallow_rules_.find(url.host);
  if (rules == disallow_rules_.end()) {
    std::vector<std::string> disallowed;
    httplib::Client client(url.scheme + "://" + url.host +
                           (url.port.empty() ? "" : ":" + url.port));
    client.set_follow_location(true);
    if (auto res = client.Get("/robots.txt"); res && res->status == 200) {
      // Minimal parser: Disallow lines inside every "User-agent: *" group.
      std::istringstream in(res->body);
      std::string line;
      bool applies = false;
      bool in_agent_block = false;
      while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) {
          line.erase(hash);
        }
        while (!line.empty() &&
               (line.back() == '\r' || line.back() == ' ')) {
          line.pop_back();
        }
        auto lower = line;
        for (char& c : lower) {
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        if (lower.rfind("user-agent:", 0) == 0) {
          const auto value = line.find_first_not_of(" \t", 11);
          const bool star = value != std::string::npos && line[value] == '*';
          applies = in_agent_block ? (applies || star) : star;
          in_agent_block = true;
        } else if (lower.rfind("disallow:", 0) == 0) {
          in_agent_block = false;
          if (!applies) continue;
          const auto value = line.find_first_not_of(" \t", 9);
          if (value != std::string::npos) {
            disallowed.push_back(line.substr(value));
          }
        } else if (!line.empty()) {
          in_agent_block = false;
        }
      }
    }
    rules = disallow_rules_.emplace(url.host, std::move(disallowed)).first;
  }
  const std::string path = url.path.empty() ? "/" : url.path;
  for (const auto& prefix : rules->second) {
    if (!prefix.empty() && path.rfind(prefix, 0) == 0) return false;
  }
  return true;
}

FetchResult LiveFetcher::fetch(const Url& url) {
  if (!allowed_by_robots(url)) return FetchResult{403, "", ""};
  auto& last = last_request_[url.host];
  const auto now = std::chrono::steady_clock::now();
  if (last.time_since_epoch().count() != 0 && now < last + delay_) {
    std::this_thread::sleep_for(last + delay_ - now);
  }
  last_request_[url.host] = std::chrono::steady_clock::now();

  httplib::Client client(url.scheme + "://" + url.host +
                         (url.port.empty() ? "" : ":" + url.port));
  client.set_follow_location(true);
  std::string target = url.path.empty() ? "/" : url.path;
  if (url.query) target += "?" + *url.query;
  auto res = client.Get(target);
  if (!res) return FetchResult{0, "", ""};
  return FetchResult{res->status, res->get_header_value("Content-Type"),
                     res->body};
}

std::optional<std::string> classify_target(const Url& url,
                                           const Registry& registry) {
  std::optional<std::string> best;
  std::size_t best_len = 0;
  for (const auto& institution : registry) {
    for (const auto& suffix : institution.domain_suffixes) {
      if (suffix.size() > best_len && host_matches_suffix(url.host, suffix)) {
        best = institution.id;
        best_len = suffix.size();
      }
    }
  }
  return best;
}

namespace {

bool matches_institution(const Url& url, const Institution& institution) {
  for (const auto& suffix : institution.domain_suffixes) {
    if (host_matches_suffix(url.host, suffix)) return true;
  }
  return false;
}

bool is_html(const std::string& content_type) {
  return content_type.empty() ||
         content_type.find("html") != std::string::npos;
}

}  // namespace

CrawlResult crawl(const Url& seed, const Institution& institution,
                  const Registry& registry, const CrawlPolicy& policy,
                  Fetcher& fetcher) {
  if (policy.miss_threshold < 1) {
    throw ConfigError("miss_threshold must be >= 1");
  }
  if (!matches_institution(seed, institution)) {
    throw ConfigError("seed host '" + seed.host + "' does not belong to " +
                      institution.id);
  }

  CrawlResult result;
  std::deque<Url> queue;
  std::set<std::string> seen;
  std::size_t miss_counter = 0;
  bool expanding = true;

  queue.push_back(seed);
  seen.insert(seed.to_string());
  result.stats.frontier_additions = 1;

  while (!queue.empty()) {
    if (policy.max_pages && result.stats.pages_fetched >= *policy.max_pages) {
      break;
    }
    const Url url = queue.front();
    queue.pop_front();
    const std::string url_text = url.to_string();

    const FetchResult fetched = fetcher.fetch(url);
    if (fetched.status != 200) {
      if (result.stats.pages_fetched == 0 && result.stats.pages_failed == 0) {
        throw RuntimeError("seed fetch failed with status " +
                           std::to_string(fetched.status) + " for " +
                           url_text);
      }
      ++result.stats.pages_failed;
      continue;
    }
    ++result.stats.pages_fetched;

    ExtractedPage page;
    if (is_html(fetched.content_type)) {
      page = extract_links(fetched.body, url);
    }
    result.documents.push_back(
        Document{url_text, url_text, institution.id, page.title, {}});

    bool found_external = false;
    std::vector<Url> enqueueable;
    for (const auto& link_text : page.links) {
      Url link;
      try {
        link = parse_url(link_text);
      } catch (const RuntimeError&) {
        continue;
      }
      const auto target = classify_target(link, registry);
      if (!target) continue;
      if (*target != institution.id) {
        found_external = true;
        result.links.push_back(LinkRecord{
            url_text, link_text, institution.id, *target, page.title,
            static_cast<std::uint64_t>(result.links.size())});
        if (policy.same_site_only) continue;
      }
      enqueueable.push_back(std::move(link));
    }

    // Counter first, then enqueueing: the page that exhausts the threshold
    // does not get its own links added.
    if (found_external) {
      miss_counter = 0;
    } else {
      ++miss_counter;
      if (expanding && miss_counter >= policy.miss_threshold) {
        expanding = false;
        result.stats.stop_trigger_index = result.stats.pages_fetched;
      }
    }
    if (expanding) {
      for (auto& link : enqueueable) {
        std::string text = link.to_string();
        if (seen.insert(text).second) {
          queue.push_back(std::move(link));
          ++result.stats.frontier_additions;
        }
      }
    }
  }
  result.stats.links_found = result.links.size();
  return result;
}

void save_links(const std::vector<LinkRecord>& links,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  for (const auto& link : links) {
    nlohmann::ordered_json row;
    row["source_url"] = link.source_url;
    row["target_url"] = link.target_url;
    row["source_institution"] = link.source_institution;
    row["target_institution"] = link.target_institution;
    row["source_title"] = link.source_title;
    row["seq"] = link.seq;
    out << row.dump() << '\n';
  }
}

std::vector<LinkRecord> load_links(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open " + path.string());
  std::vector<LinkRecord> links;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    try {
      LinkRecord link;
      link.source_url = row.at("source_url").get<std::string>();
      link.target_url = row.at("target_url").get<std::string>();
      link.source_institution =
          row.at("source_institution").get<std::string>();
      link.target_institution =
          row.at("target_institution").get<std::string>();
      link.source_title = row.at("source_title").get<std::string>();
      link.seq = row.at("seq").get<std::uint64_t>();
      links.push_back(std::move(link));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return links;
}

}  // namespace unilink
