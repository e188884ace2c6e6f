#pragma once

#include <compare>
#include <string>
#include <vector>

namespace qcp {

/// One letter of a monomial in the generators: z_gen or z_gen^* (starred).
struct Letter {
  int gen = 1;  // 1-based generator index
  bool star = false;

  friend std::strong_ordering operator<=>(const Letter& a, const Letter& b) {
    // Starred letters sort before unstarred ones; this makes map iteration
    // match the normal-form shape (starred block on the left).
    const int ta = a.star ? 0 : 1, tb = b.star ? 0 : 1;
    if (auto c = ta <=> tb; c != 0) return c;
    return a.gen <=> b.gen;
  }
  friend bool operator==(const Letter& a, const Letter& b) {
    return a.gen == b.gen && a.star == b.star;
  }
};

/// A (possibly empty) product of generator letters.
using Word = std::vector<Letter>;

struct WordLess {
  bool operator()(const Word& a, const Word& b) const {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [](const Letter& x, const Letter& y) { return x < y; });
  }
};

inline std::string letter_str(const Letter& l) {
  return "z" + std::to_string(l.gen) + (l.star ? "#" : "");
}

inline std::string word_str(const Word& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += "*";
    out += letter_str(w[i]);
  }
  return out;
}

inline Word concat(Word a, const Word& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace qcp
