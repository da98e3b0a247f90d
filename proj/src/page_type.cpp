#include "unilink/page_type.hpp"

#include <algorithm>
#include <cctype>

namespace unilink {

namespace {

constexpr std::array<std::string_view, kPageTypeCount> kLabels = {
    "About",    "BusinessAndInnovation",
    "Discussion", "Support",
    "Research", "Staff",
    "StudentLife", "Study",
};

constexpr std::array<std::string_view, kPageTypeCount> kDisplayNames = {
    "About",    "Business and Innovation",
    "Discussion", "Support",
    "Research", "Staff",
    "Student Life", "Study",
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_label(PageType type) { return kLabels[index_of(type)]; }

std::string_view display_name(PageType type) {
  return kDisplayNames[index_of(type)];
}

std::optional<PageType> parse_page_type(std::string_view label) {
  for (PageType type : all_page_types()) {
    if (iequals(label, to_label(type))) return type;
  }
  return std::nullopt;
}

std::string valid_page_type_labels() {
  std::string out;
  for (PageType type : all_page_types()) {
    if (!out.empty()) out += ", ";
    out += to_label(type);
  }
  return out;
}

}  // namespace unilink
