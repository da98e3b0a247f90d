#include "unilink/html.hpp"

#include <cctype>

#include "unilink/errors.hpp"

namespace unilink {

namespace {

char lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (lower(a[i]) != lower(b[i])) return false;
  }
  return true;
}

// The five named entities that matter for URLs and titles, plus decimal and
// hex numeric escapes for the ASCII range.
std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out += text[i++];
      continue;
    }
    const auto end = text.find(';', i);
    if (end == std::string_view::npos || end - i > 8) {
      out += text[i++];
      continue;
    }
    const std::string_view name = text.substr(i + 1, end - i - 1);
    if (iequals(name, "amp")) {
      out += '&';
    } else if (iequals(name, "lt")) {
      out += '<';
    } else if (iequals(name, "gt")) {
      out += '>';
    } else if (iequals(name, "quot")) {
      out += '"';
    } else if (iequals(name, "apos")) {
      out += '\'';
    } else if (!name.empty() && name[0] == '#') {
      int code = 0;
      bool ok = name.size() > 1;
      if (name.size() > 2 && (name[1] == 'x' || name[1] == 'X')) {
        for (std::size_t j = 2; j < name.size(); ++j) {
          const char c = lower(name[j]);
          if (c >= '0' && c <= '9') {
            code = code * 16 + (c - '0');
          } else if (c >= 'a' && c <= 'f') {
            code = code * 16 + (c - 'a' + 10);
          } else {
            ok = false;
            break;
          }
        }
      } else {
        for (std::size_t j = 1; j < name.size(); ++j) {
          if (name[j] < '0' || name[j] > '9') {
            ok = false;
            break;
          }
          code = code * 10 + (name[j] - '0');
        }
      }
      if (!ok || code <= 0 || code > 126) {
        out += text[i++];
        continue;
      }
      out += static_cast<char>(code);
    } else {
      out += text[i++];
      continue;
    }
    i = end + 1;
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool in_space = true;  // swallow leading whitespace
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) out += ' ';
      in_space = true;
    } else {
      out += c;
      in_space = false;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

struct Tag {
  std::string_view name;    // lowercase comparison via iequals
  std::string_view attrs;   // raw text after the name, before '>'
  bool closing = false;
  std::size_t end = 0;      // index just past '>'
};

// Parses the tag starting at html[pos] == '<'. Returns false for stray '<'.
bool parse_tag(std::string_view html, std::size_t pos, Tag& tag) {
  std::size_t i = pos + 1;
  if (i < html.size() && html[i] == '/') {
    tag.closing = true;
    ++i;
  } else {
    tag.closing = false;
  }
  const std::size_t name_start = i;
  while (i < html.size() &&
         (std::isalnum(static_cast<unsigned char>(html[i])) ||
          html[i] == '!' || html[i] == '-')) {
    ++i;
  }
  if (i == name_start) return false;
  tag.name = html.substr(name_start, i - name_start);
  const auto close = html.find('>', i);
  if (close == std::string_view::npos) return false;
  tag.attrs = html.substr(i, close - i);
  tag.end = close + 1;
  return true;
}

// First value of the named attribute inside a tag's attribute text; empty
// optional when absent. Quoted and unquoted forms accepted.
std::optional<std::string> find_attribute(std::string_view attrs,
                                          std::string_view wanted) {
  std::size_t i = 0;
  while (i < attrs.size()) {
    while (i < attrs.size() &&
           (std::isspace(static_cast<unsigned char>(attrs[i])) ||
            attrs[i] == '/')) {
      ++i;
    }
    const std::size_t name_start = i;
    while (i < attrs.size() && attrs[i] != '=' && attrs[i] != '/' &&
           !std::isspace(static_cast<unsigned char>(attrs[i]))) {
      ++i;
    }
    const std::string_view name = attrs.substr(name_start, i - name_start);
    if (name.empty()) break;
    while (i < attrs.size() &&
           std::isspace(static_cast<unsigned char>(attrs[i]))) {
      ++i;
    }
    if (i >= attrs.size() || attrs[i] != '=') {
      if (iequals(name, wanted)) return std::string();
      continue;
    }
    ++i;
    while (i < attrs.size() &&
           std::isspace(static_cast<unsigned char>(attrs[i]))) {
      ++i;
    }
    std::string_view value;
    if (i < attrs.size() && (attrs[i] == '"' || attrs[i] == '\'')) {
      const char quote = attrs[i++];
      const auto end = attrs.find(quote, i);
      if (end == std::string_view::npos) {
        value = attrs.substr(i);
        i = attrs.size();
      } else {
        value = attrs.substr(i, end - i);
        i = end + 1;
      }
    } else {
      const std::size_t value_start = i;
      while (i < attrs.size() &&
             !std::isspace(static_cast<unsigned char>(attrs[i]))) {
        ++i;
      }
      value = attrs.substr(value_start, i - value_start);
    }
    if (iequals(name, wanted)) return std::string(value);
  }
  return std::nullopt;
}

}  // namespace

ExtractedPage extract_links(std::string_view html, const Url& base) {
  ExtractedPage page;
  bool title_seen = false;
  std::size_t i = 0;
  while (i < html.size()) {
    const auto open = html.find('<', i);
    if (open == std::string_view::npos) break;
    if (html.compare(open, 4, "<!--") == 0) {
      const auto end = html.find("-->", open + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    Tag tag;
    if (!parse_tag(html, open, tag)) {
      i = open + 1;
      continue;
    }
    i = tag.end;
    if (tag.closing) continue;
    if (iequals(tag.name, "script") || iequals(tag.name, "style")) {
      // Raw-text elements: skip to the matching close tag.
      const std::string close = "</" + std::string(tag.name);
      std::size_t j = i;
      while (j < html.size()) {
        const auto candidate = html.find('<', j);
        if (candidate == std::string_view::npos) {
          j = html.size();
          break;
        }
        if (candidate + close.size() <= html.size() &&
            iequals(html.substr(candidate, close.size()), close)) {
          const auto end = html.find('>', candidate);
          j = end == std::string_view::npos ? html.size() : end + 1;
          break;
        }
        j = candidate + 1;
      }
      i = j;
      continue;
    }
    if (iequals(tag.name, "a")) {
      auto href = find_attribute(tag.attrs, "href");
      if (href && !href->empty()) {
        try {
          page.links.push_back(normalize_url(decode_entities(*href), base));
        } catch (const RuntimeError&) {
          // Non-hierarchical or unparseable reference; best-effort contract.
        }
      }
      continue;
    }
    if (!title_seen && iequals(tag.name, "title")) {
      std::size_t end = i;
      while (end < html.size()) {
        const auto candidate = html.find('<', end);
        if (candidate == std::string_view::npos) {
          end = html.size();
          break;
        }
        if (candidate + 7 <= html.size() &&
            iequals(html.substr(candidate, 7), "</title")) {
          end = candidate;
          break;
        }
        end = candidate + 1;
      }
      page.title =
          collapse_whitespace(decode_entities(html.substr(i, end - i)));
      title_seen = true;
      continue;
    }
  }
  return page;
}

}  // namespace unilink
