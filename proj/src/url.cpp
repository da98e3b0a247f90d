#include "unilink/url.hpp"

#include <algorithm>
#include <cctype>

#include "unilink/errors.hpp"

namespace unilink {

namespace {

// Split into the five RFC 3986 components without validating any of them.
struct RawParts {
  std::optional<std::string> scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
  // fragment is parsed and discarded
};

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)); }

bool is_scheme_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
         c == '.';
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

RawParts split_reference(std::string_view text) {
  RawParts parts;
  // fragment
  if (auto hash = text.find('#'); hash != std::string_view::npos) {
    text = text.substr(0, hash);
  }
  // scheme
  if (!text.empty() && is_alpha(text[0])) {
    std::size_t i = 1;
    while (i < text.size() && is_scheme_char(text[i])) ++i;
    if (i < text.size() && text[i] == ':') {
      parts.scheme = std::string(text.substr(0, i));
      text = text.substr(i + 1);
    }
  }
  // authority
  if (text.substr(0, 2) == "//") {
    text = text.substr(2);
    std::size_t end = text.find_first_of("/?");
    if (end == std::string_view::npos) end = text.size();
    parts.authority = std::string(text.substr(0, end));
    text = text.substr(end);
  }
  // query
  if (auto qmark = text.find('?'); qmark != std::string_view::npos) {
    parts.query = std::string(text.substr(qmark + 1));
    text = text.substr(0, qmark);
  }
  parts.path = std::string(text);
  return parts;
}

// RFC 3986 section 5.2.4.
std::string remove_dot_segments(std::string_view input) {
  std::string in(input);
  std::string out;
  while (!in.empty()) {
    if (in.rfind("../", 0) == 0) {
      in.erase(0, 3);
    } else if (in.rfind("./", 0) == 0) {
      in.erase(0, 2);
    } else if (in.rfind("/./", 0) == 0) {
      in.erase(0, 2);  // keep the leading '/'
    } else if (in == "/.") {
      in = "/";
    } else if (in.rfind("/../", 0) == 0 || in == "/..") {
      in = (in == "/..") ? "/" : in.substr(3);
      auto slash = out.find_last_of('/');
      out.erase(slash == std::string::npos ? 0 : slash);
    } else if (in == "." || in == "..") {
      in.clear();
    } else {
      std::size_t start = (in[0] == '/') ? 1 : 0;
      std::size_t next = in.find('/', start);
      if (next == std::string::npos) next = in.size();
      out.append(in, 0, next);
      in.erase(0, next);
    }
  }
  return out;
}

std::string merge_paths(const Url& base, const std::string& ref_path) {
  if (!base.host.empty() && base.path.empty()) return "/" + ref_path;
  auto slash = base.path.find_last_of('/');
  if (slash == std::string::npos) return ref_path;
  return base.path.substr(0, slash + 1) + ref_path;
}

// Builds the final Url from resolved components, applying the normalization
// rules: lowercase scheme/host, strip default port.
Url assemble(std::string scheme, const std::string& authority, std::string path,
             std::optional<std::string> query) {
  Url url;
  url.scheme = to_lower(scheme);
  if (url.scheme != "http" && url.scheme != "https") {
    throw RuntimeError("unsupported or non-hierarchical scheme '" + scheme +
                       "'");
  }
  // authority = [userinfo@]host[:port]; userinfo is not supported.
  std::string_view rest = authority;
  if (rest.find('@') != std::string_view::npos) {
    throw RuntimeError("userinfo in URL authority is not supported");
  }
  std::string_view host;
  std::string_view port;
  if (!rest.empty() && rest[0] == '[') {  // IPv6 literal
    auto close = rest.find(']');
    if (close == std::string_view::npos) {
      throw RuntimeError("unterminated IPv6 host");
    }
    host = rest.substr(0, close + 1);
    rest = rest.substr(close + 1);
    if (!rest.empty()) {
      if (rest[0] != ':') throw RuntimeError("malformed authority");
      port = rest.substr(1);
    }
  } else {
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      host = rest;
    } else {
      host = rest.substr(0, colon);
      port = rest.substr(colon + 1);
    }
  }
  if (host.empty()) throw RuntimeError("URL has no host");
  for (char c : port) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw RuntimeError("non-numeric port");
    }
  }
  url.host = to_lower(host);
  url.port = std::string(port);
  if ((url.scheme == "http" && url.port == "80") ||
      (url.scheme == "https" && url.port == "443")) {
    url.port.clear();
  }
  url.path = std::move(path);
  url.query = std::move(query);
  return url;
}

}  // namespace

Url parse_url(std::string_view text) {
  RawParts parts = split_reference(text);
  if (!parts.scheme) {
    throw RuntimeError("not an absolute URL: '" + std::string(text) + "'");
  }
  if (!parts.authority) {
    throw RuntimeError("unsupported or non-hierarchical scheme '" +
                       *parts.scheme + "'");
  }
  return assemble(*parts.scheme, *parts.authority,
                  remove_dot_segments(parts.path), std::move(parts.query));
}

Url resolve_url(std::string_view reference, const Url& base) {
  RawParts ref = split_reference(reference);
  if (ref.scheme) {
    if (!ref.authority) {
      throw RuntimeError("unsupported or non-hierarchical scheme '" +
                         *ref.scheme + "'");
    }
    return assemble(*ref.scheme, *ref.authority,
                    remove_dot_segments(ref.path), std::move(ref.query));
  }
  std::string authority = base.host + (base.port.empty() ? "" : ":" + base.port);
  if (ref.authority) {
    return assemble(base.scheme, *ref.authority,
                    remove_dot_segments(ref.path), std::move(ref.query));
  }
  std::string path;
  std::optional<std::string> query;
  if (ref.path.empty()) {
    path = base.path;
    query = ref.query ? ref.query : base.query;
  } else {
    path = (ref.path[0] == '/') ? remove_dot_segments(ref.path)
                                : remove_dot_segments(merge_paths(base, ref.path));
    query = std::move(ref.query);
  }
  return assemble(base.scheme, authority, std::move(path), std::move(query));
}

std::string normalize_url(std::string_view reference, const Url& base) {
  return resolve_url(reference, base).to_string();
}

std::string Url::to_string() const {
  std::string out = scheme + "://" + host;
  if (!port.empty()) {
    out += ':';
    out += port;
  }
  out += path;
  if (query) {
    out += '?';
    out += *query;
  }
  return out;
}

bool host_matches_suffix(std::string_view host, std::string_view suffix) {
  if (suffix.empty() || host.size() < suffix.size()) return false;
  if (!host.ends_with(suffix)) return false;
  if (host.size() == suffix.size()) return true;
  return host[host.size() - suffix.size() - 1] == '.';
}

}  // namespace unilink
