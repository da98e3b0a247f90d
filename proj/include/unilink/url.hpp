#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace unilink {

// Parsed hierarchical URL. Only http/https-style URLs with an authority are
// accepted; scheme and host are stored lowercase, everything else verbatim.
struct Url {
  std::string scheme;
  std::string host;
  std::string port;  // empty when absent or removed as a scheme default
  std::string path;  // may be empty; leading '/' included when present
  std::optional<std::string> query;  // without the '?'

  std::string to_string() const;

  bool operator==(const Url&) const = default;
};

// Parses an absolute URL. Throws RuntimeError on unparseable input or a
// non-hierarchical scheme (mailto:, javascript:, ...). Fragments are dropped,
// default ports (http:80, https:443) removed.
Url parse_url(std::string_view text);

// RFC 3986 reference resolution against a base, then the same normalization
// as parse_url: lowercase scheme/host, no fragment, no default port, path and
// query preserved. Dot segments are removed during resolution.
Url resolve_url(std::string_view reference, const Url& base);

// Convenience: resolve + serialize.
std::string normalize_url(std::string_view reference, const Url& base);

// True when `host` equals `suffix` or ends with "." + suffix, i.e. the match
// aligns on a hostname label boundary.
bool host_matches_suffix(std::string_view host, std::string_view suffix);

}  // namespace unilink
