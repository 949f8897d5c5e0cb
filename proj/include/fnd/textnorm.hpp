#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fnd/stem.hpp"

namespace fnd {

using StopWordSet = std::unordered_set<std::string>;

enum class StopWordList { None, En, Es, Custom };

std::string_view to_string(StopWordList list) noexcept;

struct NormalizerConfig {
  bool lowercase = true;
  bool strip_non_alnum = true;
  StopWordList stop_words = StopWordList::None;
  /// Used when stop_words == Custom.
  std::filesystem::path stop_words_path;
  StemmerKind stemming = StemmerKind::Off;
  /// Unlimited when empty. Consumed by sequence encoding, not by normalize().
  std::optional<std::size_t> max_len;
  std::string pad_token = "<pad>";
  std::string unk_token = "<unk>";

  /// Canonical byte string for fingerprints. Custom stop lists contribute a
  /// hash of their contents rather than their path.
  std::string canonical() const;
};

/// Parses the stop-word file format: UTF-8, one token per line, '#' starts a
/// comment. Entries are lowercased with the same rules as normalize().
StopWordSet parse_stopwords(std::string_view content);
StopWordSet load_stopwords(const std::filesystem::path& path);
const StopWordSet& builtin_stopwords(StopWordList list);

/// Unicode-aware lowercasing (NFC first).
std::string to_lower(std::string_view text);

/// Splits on maximal runs of non-alphanumeric code points; letters of any
/// script and decimal digits count as alphanumeric.
std::vector<std::string> split_alnum(std::string_view text);

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens, const StopWordSet& stop_set);

/// Exactly max_len ids: head-truncated, or post-padded with pad_id.
std::vector<std::int32_t> pad_truncate(std::span<const std::int32_t> ids, std::size_t max_len,
                                       std::int32_t pad_id);

/// Resolved normalizer: the stop list is loaded once at construction.
/// Rule order: lowercase, split, stop words, stemming.
class Normalizer {
 public:
  explicit Normalizer(NormalizerConfig config);

  std::vector<std::string> operator()(std::string_view text) const;

  const NormalizerConfig& config() const noexcept { return config_; }

 private:
  NormalizerConfig config_;
  std::shared_ptr<const StopWordSet> stop_set_;
};

std::vector<std::string> normalize(std::string_view text, const NormalizerConfig& config);

}  // namespace fnd
