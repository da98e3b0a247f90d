#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace unilink {

// The eight functional categories of academic web pages. Declaration order is
// the canonical tie-break order wherever a deterministic choice among classes
// is needed (leaf predictions, report rows, ...).
enum class PageType : std::uint8_t {
  About = 0,
  BusinessAndInnovation,
  Discussion,
  Support,
  Research,
  Staff,
  StudentLife,
  Study,
};

inline constexpr std::size_t kPageTypeCount = 8;

constexpr std::array<PageType, kPageTypeCount> all_page_types() {
  return {PageType::About,    PageType::BusinessAndInnovation,
          PageType::Discussion, PageType::Support,
          PageType::Research, PageType::Staff,
          PageType::StudentLife, PageType::Study};
}

constexpr std::size_t index_of(PageType type) {
  return static_cast<std::size_t>(type);
}

// Canonical label as written in data files, e.g. "StudentLife".
std::string_view to_label(PageType type);

// Human-readable name for report tables, e.g. "Student Life".
std::string_view display_name(PageType type);

// Case-insensitive parse of a canonical label. Empty on anything that is not
// one of the eight labels.
std::optional<PageType> parse_page_type(std::string_view label);

// Comma-separated list of the canonical labels, for error messages.
std::string valid_page_type_labels();

}  // namespace unilink
