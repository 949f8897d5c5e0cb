#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace fnd {

enum class StemmerKind { Off, PorterEn, LightEs };

std::string_view to_string(StemmerKind kind) noexcept;
StemmerKind parse_stemmer(std::string_view text);

/// Pluggable stemmer. Input tokens are expected to be lowercased.
class Stemmer {
 public:
  virtual ~Stemmer() = default;
  virtual std::string stem(std::string_view token) const = 0;
};

/// Porter (1980) suffix stripper for English. Tokens of one or two
/// characters, and tokens containing anything other than a-z, are returned
/// unchanged. Not idempotent in general: stem(stem(w)) may differ from stem(w).
class PorterStemmer final : public Stemmer {
 public:
  std::string stem(std::string_view token) const override;
};

/// Light Spanish stemmer: removes the single longest suffix from a fixed table
/// (derivational endings, gerunds, participles, plurals) provided at least
/// three characters of stem remain.
class LightSpanishStemmer final : public Stemmer {
 public:
  std::string stem(std::string_view token) const override;
};

/// Shared stateless instance for the given kind; nullptr for Off.
const Stemmer* stemmer_for(StemmerKind kind);

std::string stem(std::string_view token, StemmerKind kind);

}  // namespace fnd
