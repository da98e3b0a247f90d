#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "unilink/url.hpp"

namespace unilink {

struct ExtractedPage {
  std::vector<std::string> links;  // absolute, normalized, document order
  std::string title;               // first title element, whitespace-collapsed
};

// Tolerant tag scanner, not a tree builder: anchor href values resolved
// against base (unresolvable ones skipped), first <title> text captured.
// Comments and script/style content are ignored. Never throws on malformed
// input.
ExtractedPage extract_links(std::string_view html, const Url& base);

}  // namespace unilink
