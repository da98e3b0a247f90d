#pragma once

#include <string>
#include <string_view>

namespace unilink {

// Porter stemming algorithm (1980), as fixed by Martin Porter's reference
// implementation: words of length <= 2 are returned unchanged, step 2 uses
// (m>0) BLI -> BLE and the extra rule (m>0) LOGI -> LOG. Input is expected
// to be lowercase alphabetic; other characters make the word pass through
// untouched.
std::string porter_stem(std::string_view word);

}  // namespace unilink
