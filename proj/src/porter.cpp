#include "unilink/porter.hpp"

#include <string>

namespace unilink {

namespace {

// Working state for one word. `k` is the index of the last live character;
// `j` marks the end of the stem after a suffix match and may be -1 when a
// suffix spans the whole word. The buffer is shortened or patched in place,
// mirroring the reference implementation.
struct Stemmer {
  std::string b;
  int k = 0;
  int j = 0;

  bool is_consonant(int i) const {
    switch (b[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !is_consonant(i - 1);
      default:
        return true;
    }
  }

  // The measure "m" of the stem b[0..j]: the number of vowel-consonant
  // transitions.
  int measure() const {
    int n = 0;
    int i = 0;
    while (true) {
      if (i > j) return n;
      if (!is_consonant(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i > j) return n;
        if (is_consonant(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i > j) return n;
        if (!is_consonant(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j; ++i) {
      if (!is_consonant(i)) return true;
    }
    return false;
  }

  bool double_consonant(int i) const {
    if (i < 1) return false;
    return b[i] == b[i - 1] && is_consonant(i);
  }

  // consonant-vowel-consonant ending at i, final consonant not w, x or y.
  bool cvc(int i) const {
    if (i < 2 || !is_consonant(i) || is_consonant(i - 1) ||
        !is_consonant(i - 2)) {
      return false;
    }
    return b[i] != 'w' && b[i] != 'x' && b[i] != 'y';
  }

  bool ends(std::string_view suffix) {
    const int len = static_cast<int>(suffix.size());
    if (len > k + 1) return false;
    if (b.compare(k + 1 - len, len, suffix) != 0) return false;
    j = k - len;
    return true;
  }

  void set_to(std::string_view s) {
    b.replace(j + 1, b.size() - (j + 1), s);
    k = j + static_cast<int>(s.size());
  }

  void replace_if_measure(std::string_view s) {
    if (measure() > 0) set_to(s);
  }

  // Plurals and -ed/-ing.
  void step1ab() {
    if (b[k] == 's') {
      if (ends("sses")) {
        k -= 2;
      } else if (ends("ies")) {
        set_to("i");
      } else if (b[k - 1] != 's') {
        --k;
      }
    }
    if (ends("eed")) {
      if (measure() > 0) --k;
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k = j;
      if (ends("at")) {
        set_to("ate");
      } else if (ends("bl")) {
        set_to("ble");
      } else if (ends("iz")) {
        set_to("ize");
      } else if (double_consonant(k)) {
        char last = b[k];
        if (last != 'l' && last != 's' && last != 'z') --k;
      } else {
        j = k;
        if (measure() == 1 && cvc(k)) set_to("e");
      }
    }
  }

  // y -> i when the stem holds a vowel.
  void step1c() {
    if (ends("y") && vowel_in_stem()) b[k] = 'i';
  }

  // Double suffixes, e.g. -ization -> -ize. Reference-implementation rule
  // set: BLI -> BLE instead of ABLI -> ABLE, plus LOGI -> LOG.
  void step2() {
    if (k == 0) return;
    switch (b[k - 1]) {
      case 'a':
        if (ends("ational")) { replace_if_measure("ate"); break; }
        if (ends("tional")) { replace_if_measure("tion"); break; }
        break;
      case 'c':
        if (ends("enci")) { replace_if_measure("ence"); break; }
        if (ends("anci")) { replace_if_measure("ance"); break; }
        break;
      case 'e':
        if (ends("izer")) { replace_if_measure("ize"); break; }
        break;
      case 'l':
        if (ends("bli")) { replace_if_measure("ble"); break; }
        if (ends("alli")) { replace_if_measure("al"); break; }
        if (ends("entli")) { replace_if_measure("ent"); break; }
        if (ends("eli")) { replace_if_measure("e"); break; }
        if (ends("ousli")) { replace_if_measure("ous"); break; }
        break;
      case 'o':
        if (ends("ization")) { replace_if_measure("ize"); break; }
        if (ends("ation")) { replace_if_measure("ate"); break; }
        if (ends("ator")) { replace_if_measure("ate"); break; }
        break;
      case 's':
        if (ends("alism")) { replace_if_measure("al"); break; }
        if (ends("iveness")) { replace_if_measure("ive"); break; }
        if (ends("fulness")) { replace_if_measure("ful"); break; }
        if (ends("ousness")) { replace_if_measure("ous"); break; }
        break;
      case 't':
        if (ends("aliti")) { replace_if_measure("al"); break; }
        if (ends("iviti")) { replace_if_measure("ive"); break; }
        if (ends("biliti")) { replace_if_measure("ble"); break; }
        break;
      case 'g':
        if (ends("logi")) { replace_if_measure("log"); break; }
        break;
    }
  }

  // -icate, -ful, -ness and friends.
  void step3() {
    switch (b[k]) {
      case 'e':
        if (ends("icate")) { replace_if_measure("ic"); break; }
        if (ends("ative")) { replace_if_measure(""); break; }
        if (ends("alize")) { replace_if_measure("al"); break; }
        break;
      case 'i':
        if (ends("iciti")) { replace_if_measure("ic"); break; }
        break;
      case 'l':
        if (ends("ical")) { replace_if_measure("ic"); break; }
        if (ends("ful")) { replace_if_measure(""); break; }
        break;
      case 's':
        if (ends("ness")) { replace_if_measure(""); break; }
        break;
    }
  }

  // Bare suffixes, removed when the remaining stem has m > 1.
  void step4() {
    if (k == 0) return;
    switch (b[k - 1]) {
      case 'a':
        if (ends("al")) break;
        return;
      case 'c':
        if (ends("ance")) break;
        if (ends("ence")) break;
        return;
      case 'e':
        if (ends("er")) break;
        return;
      case 'i':
        if (ends("ic")) break;
        return;
      case 'l':
        if (ends("able")) break;
        if (ends("ible")) break;
        return;
      case 'n':
        if (ends("ant")) break;
        if (ends("ement")) break;
        if (ends("ment")) break;
        if (ends("ent")) break;
        return;
      case 'o':
        if (ends("ion") && j >= 0 && (b[j] == 's' || b[j] == 't')) break;
        if (ends("ou")) break;
        return;
      case 's':
        if (ends("ism")) break;
        return;
      case 't':
        if (ends("ate")) break;
        if (ends("iti")) break;
        return;
      case 'u':
        if (ends("ous")) break;
        return;
      case 'v':
        if (ends("ive")) break;
        return;
      case 'z':
        if (ends("ize")) break;
        return;
      default:
        return;
    }
    if (measure() > 1) k = j;
  }

  // Final -e and -ll tidy-up.
  void step5() {
    j = k;
    if (b[k] == 'e') {
      int m = measure();
      if (m > 1 || (m == 1 && !cvc(k - 1))) --k;
    }
    if (b[k] == 'l' && double_consonant(k) && measure() > 1) --k;
  }
};

}  // namespace

std::string porter_stem(std::string_view word) {
  std::string result(word);
  if (result.size() <= 2) return result;  // reference-implementation cutoff
  for (char c : result) {
    if (c < 'a' || c > 'z') return result;
  }
  Stemmer s;
  s.b = std::move(result);
  s.k = static_cast<int>(s.b.size()) - 1;
  s.step1ab();
  s.step1c();
  s.step2();
  s.step3();
  s.step4();
  s.step5();
  s.b.resize(s.k + 1);
  return std::move(s.b);
}

}  // namespace unilink
