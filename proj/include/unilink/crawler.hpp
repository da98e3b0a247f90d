#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "unilink/corpus.hpp"
#include "unilink/url.hpp"

namespace unilink {

struct FetchResult {
  int status = 0;
  std::string content_type;
  std::string body;
};

class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual FetchResult fetch(const Url& url) = 0;
};

// In-memory page store; misses come back 404. Deterministic.
class MemoryFetcher : public Fetcher {
 public:
  void add(const std::string& url, std::string body,
           std::string content_type = "text/html");
  std::size_t size() const { return pages_.size(); }
  FetchResult fetch(const Url& url) override;

 private:
  struct Page {
    std::string body;
    std::string content_type;
  };
  std::unordered_map<std::string, Page> pages_;
};

// Directory-backed page store. The index file maps one URL per line to a
// body file: "URL<TAB>filename[<TAB>content-type]". Deterministic.
class FixtureFetcher : public Fetcher {
 public:
  static FixtureFetcher load(const std::filesystem::path& dir);
  FetchResult fetch(const Url& url) override;

 private:
  struct Entry {
    std::filesystem::path file;
    std::string content_type;
  };
  std::unordered_map<std::string, Entry> entries_;
};

// HTTP(S) client honoring robots.txt (User-agent: *) and a per-host delay.
class LiveFetcher : public Fetcher {
 public:
  explicit LiveFetcher(
      std::chrono::milliseconds per_host_delay = std::chrono::seconds(1));
  FetchResult fetch(const Url& url) override;

 private:
  bool allowed_by_robots(const Url& url);

  std::chrono::milliseconds delay_;
  std::map<std::string, std::chrono::steady_clock::time_point> last_request_;
  std::map<std::string, std::vector<std::string>> disallow_rules_;
};

// One hyperlink leaving the crawled institution for another registered one.
struct LinkRecord {
  std::string source_url;
  std::string target_url;
  std::string source_institution;
  std::string target_institution;
  std::string source_title;
  std::uint64_t seq = 0;  // discovery order within the crawl

  bool operator==(const LinkRecord&) const = default;
};

struct CrawlPolicy {
  std::size_t miss_threshold = 2000;  // >= 1; consecutive link-less pages
  std::optional<std::size_t> max_pages;
  std::chrono::milliseconds politeness_delay = std::chrono::seconds(1);
  bool same_site_only = true;
};

struct CrawlStats {
  std::size_t pages_fetched = 0;
  std::size_t pages_failed = 0;
  std::size_t links_found = 0;
  std::size_t frontier_additions = 0;  // seed included
  // Ordinal (1-based, in fetch order) of the page whose miss pushed the
  // counter to the threshold; unset when expansion never stopped.
  std::optional<std::size_t> stop_trigger_index;
};

struct CrawlResult {
  std::vector<Document> documents;
  std::vector<LinkRecord> links;
  CrawlStats stats;
};

// Longest-suffix match of the URL host over every institution's suffixes.
std::optional<std::string> classify_target(const Url& url,
                                           const Registry& registry);

// BFS from the seed, enqueueing only same-institution URLs. After each
// fetched page the consecutive-miss counter updates (reset on a page with at
// least one inter-institution link); reaching miss_threshold permanently
// stops frontier expansion, and the page that triggers it does not get its
// own links enqueued. The queue still drains. Seed fetch failure is fatal;
// later failures are counted and skipped.
CrawlResult crawl(const Url& seed, const Institution& institution,
                  const Registry& registry, const CrawlPolicy& policy,
                  Fetcher& fetcher);

void save_links(const std::vector<LinkRecord>& links,
                const std::filesystem::path& path);
std::vector<LinkRecord> load_links(const std::filesystem::path& path);

}  // namespace unilink
