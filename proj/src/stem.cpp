#include "fnd/stem.hpp"

#include <array>
#include <utility>

#include "fnd/error.hpp"

namespace fnd {

std::string_view to_string(StemmerKind kind) noexcept {
  switch (kind) {
    case StemmerKind::Off: return "off";
    case StemmerKind::PorterEn: return "porter-en";
    case StemmerKind::LightEs: return "light-es";
  }
  return "off";
}

StemmerKind parse_stemmer(std::string_view text) {
  if (text == "off" || text == "none" || text == "false") return StemmerKind::Off;
  if (text == "porter-en") return StemmerKind::PorterEn;
  if (text == "light-es") return StemmerKind::LightEs;
  throw Error(ErrorKind::InvalidArgument, "unknown stemmer '" + std::string(text) + "'");
}

namespace {

// ---------------------------------------------------------------- Porter

class PorterWord {
 public:
  explicit PorterWord(std::string w) : w_(std::move(w)) {}

  std::string take() && { return std::move(w_); }

  bool consonant(std::size_t i) const {
    switch (w_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u': return false;
      case 'y': return i == 0 ? true : !consonant(i - 1);
      default: return true;
    }
  }

  // m() over the first n characters
  int measure(std::size_t n) const {
    int m = 0;
    std::size_t i = 0;
    while (i < n && consonant(i)) ++i;
    while (i < n) {
      while (i < n && !consonant(i)) ++i;
      if (i >= n) break;
      while (i < n && consonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool has_vowel(std::size_t n) const {
    for (std::size_t i = 0; i < n; ++i) {
      if (!consonant(i)) return true;
    }
    return false;
  }

  bool double_consonant(std::size_t n) const {
    return n >= 2 && w_[n - 1] == w_[n - 2] && consonant(n - 1);
  }

  // *o: stem ends cvc, the final c not w, x or y
  bool cvc(std::size_t n) const {
    if (n < 3 || !consonant(n - 1) || consonant(n - 2) || !consonant(n - 3)) return false;
    const char c = w_[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends_with(std::string_view s) const { return w_.ends_with(s); }
  std::size_t size() const { return w_.size(); }
  char back() const { return w_.back(); }

  void replace_suffix(std::size_t suffix_len, std::string_view with) {
    w_.resize(w_.size() - suffix_len);
    w_ += with;
  }

 private:
  std::string w_;
};

enum class Cond { None, MeasurePositive, MeasureAbove1, MeasureAbove1AndST };

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
  Cond cond;
};

bool holds(const PorterWord& w, std::size_t stem_len, Cond cond) {
  switch (cond) {
    case Cond::None: return true;
    case Cond::MeasurePositive: return w.measure(stem_len) > 0;
    case Cond::MeasureAbove1: return w.measure(stem_len) > 1;
    case Cond::MeasureAbove1AndST: {
      if (stem_len == 0) return false;
      return w.measure(stem_len) > 1 && (w.ends_with("sion") || w.ends_with("tion"));
    }
  }
  return false;
}

// First rule whose suffix matches decides; if its condition fails the word is left alone.
template <std::size_t N>
void apply_first(PorterWord& w, const std::array<Rule, N>& rules) {
  for (const auto& r : rules) {
    if (!w.ends_with(r.suffix)) continue;
    const std::size_t stem_len = w.size() - r.suffix.size();
    if (holds(w, stem_len, r.cond)) w.replace_suffix(r.suffix.size(), r.replacement);
    return;
  }
}

constexpr std::array<Rule, 20> kStep2{{
    {"ational", "ate", Cond::MeasurePositive}, {"tional", "tion", Cond::MeasurePositive},
    {"enci", "ence", Cond::MeasurePositive},   {"anci", "ance", Cond::MeasurePositive},
    {"izer", "ize", Cond::MeasurePositive},    {"abli", "able", Cond::MeasurePositive},
    {"alli", "al", Cond::MeasurePositive},     {"entli", "ent", Cond::MeasurePositive},
    {"eli", "e", Cond::MeasurePositive},       {"ousli", "ous", Cond::MeasurePositive},
    {"ization", "ize", Cond::MeasurePositive}, {"ation", "ate", Cond::MeasurePositive},
    {"ator", "ate", Cond::MeasurePositive},    {"alism", "al", Cond::MeasurePositive},
    {"iveness", "ive", Cond::MeasurePositive}, {"fulness", "ful", Cond::MeasurePositive},
    {"ousness", "ous", Cond::MeasurePositive}, {"aliti", "al", Cond::MeasurePositive},
    {"iviti", "ive", Cond::MeasurePositive},   {"biliti", "ble", Cond::MeasurePositive},
}};

constexpr std::array<Rule, 7> kStep3{{
    {"icate", "ic", Cond::MeasurePositive}, {"ative", "", Cond::MeasurePositive},
    {"alize", "al", Cond::MeasurePositive}, {"iciti", "ic", Cond::MeasurePositive},
    {"ical", "ic", Cond::MeasurePositive},  {"ful", "", Cond::MeasurePositive},
    {"ness", "", Cond::MeasurePositive},
}};

constexpr std::array<Rule, 19> kStep4{{
    {"al", "", Cond::MeasureAbove1},    {"ance", "", Cond::MeasureAbove1},
    {"ence", "", Cond::MeasureAbove1},  {"er", "", Cond::MeasureAbove1},
    {"ic", "", Cond::MeasureAbove1},    {"able", "", Cond::MeasureAbove1},
    {"ible", "", Cond::MeasureAbove1},  {"ant", "", Cond::MeasureAbove1},
    {"ement", "", Cond::MeasureAbove1}, {"ment", "", Cond::MeasureAbove1},
    {"ent", "", Cond::MeasureAbove1},   {"ion", "", Cond::MeasureAbove1AndST},
    {"ou", "", Cond::MeasureAbove1},    {"ism", "", Cond::MeasureAbove1},
    {"ate", "", Cond::MeasureAbove1},   {"iti", "", Cond::MeasureAbove1},
    {"ous", "", Cond::MeasureAbove1},   {"ive", "", Cond::MeasureAbove1},
    {"ize", "", Cond::MeasureAbove1},
}};

void step1a(PorterWord& w) {
  if (w.ends_with("sses")) w.replace_suffix(4, "ss");
  else if (w.ends_with("ies")) w.replace_suffix(3, "i");
  else if (w.ends_with("ss")) return;
  else if (w.ends_with("s")) w.replace_suffix(1, "");
}

void step1b(PorterWord& w) {
  if (w.ends_with("eed")) {
    if (w.measure(w.size() - 3) > 0) w.replace_suffix(3, "ee");
    return;
  }
  std::size_t cut = 0;
  if (w.ends_with("ed") && w.has_vowel(w.size() - 2)) cut = 2;
  else if (w.ends_with("ing") && w.has_vowel(w.size() - 3)) cut = 3;
  if (cut == 0) return;
  w.replace_suffix(cut, "");

  if (w.ends_with("at") || w.ends_with("bl") || w.ends_with("iz")) {
    w.replace_suffix(0, "e");
  } else if (w.double_consonant(w.size())) {
    const char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.replace_suffix(1, "");
  } else if (w.measure(w.size()) == 1 && w.cvc(w.size())) {
    w.replace_suffix(0, "e");
  }
}

void step1c(PorterWord& w) {
  if (w.ends_with("y") && w.has_vowel(w.size() - 1)) w.replace_suffix(1, "i");
}

void step5(PorterWord& w) {
  if (w.ends_with("e")) {
    const std::size_t n = w.size() - 1;
    const int m = w.measure(n);
    if (m > 1 || (m == 1 && !w.cvc(n))) w.replace_suffix(1, "");
  }
  if (w.ends_with("ll") && w.measure(w.size()) > 1) w.replace_suffix(1, "");
}

// ---------------------------------------------------------------- Spanish

// Longest suffix wins; order within the table is irrelevant.
constexpr std::array<std::string_view, 47> kSpanishSuffixes{
    // derivational
    "amientos", "imientos", "amiento", "imiento", "aciones", "uciones", "idades", "adoras",
    "adores", "ancias", "encias", "mente", "ación", "ución", "adora", "ador", "ancia", "encia",
    "idad", "istas", "ista", "ismos", "ismo", "ables", "ibles", "able", "ible", "osos", "osas",
    "oso", "osa",
    // gerunds
    "ando", "iendo", "yendo",
    // participles
    "ados", "adas", "idos", "idas", "ado", "ada", "ido", "ida",
    // plurals
    "es", "s",
    // adverbial/adjectival leftovers
    "ivas", "ivos", "iva",
};

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

}  // namespace

std::string PorterStemmer::stem(std::string_view token) const {
  if (token.size() <= 2) return std::string(token);
  for (char c : token) {
    if (c < 'a' || c > 'z') return std::string(token);
  }
  PorterWord w{std::string(token)};
  step1a(w);
  step1b(w);
  step1c(w);
  apply_first(w, kStep2);
  apply_first(w, kStep3);
  apply_first(w, kStep4);
  step5(w);
  return std::move(w).take();
}

std::string LightSpanishStemmer::stem(std::string_view token) const {
  std::string_view best;
  for (auto suffix : kSpanishSuffixes) {
    if (suffix.size() > best.size() && token.ends_with(suffix) &&
        utf8_length(token.substr(0, token.size() - suffix.size())) >= 3) {
      best = suffix;
    }
  }
  return std::string(token.substr(0, token.size() - best.size()));
}

const Stemmer* stemmer_for(StemmerKind kind) {
  static const PorterStemmer porter;
  static const LightSpanishStemmer light_es;
  switch (kind) {
    case StemmerKind::Off: return nullptr;
    case StemmerKind::PorterEn: return &porter;
    case StemmerKind::LightEs: return &light_es;
  }
  return nullptr;
}

std::string stem(std::string_view token, StemmerKind kind) {
  const Stemmer* s = stemmer_for(kind);
  return s ? s->stem(token) : std::string(token);
}

}  // namespace fnd
