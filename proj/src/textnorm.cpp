#include "fnd/textnorm.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <fstream>
#include <mutex>
#include <sstream>

#include "fnd/error.hpp"
#include "fnd/fingerprint.hpp"

namespace fnd {

namespace detail {
extern const std::string_view kStopwordsEn;
extern const std::string_view kStopwordsEs;
}  // namespace detail

namespace {

bool is_ascii(std::string_view s) {
  for (unsigned char c : s) {
    if (c >= 0x80) return false;
  }
  return true;
}

std::string nfc(std::string_view text) {
  if (is_ascii(text)) return std::string(text);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return std::string(text);
  const icu::UnicodeString source =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString composed = normalizer->normalize(source, status);
  if (U_FAILURE(status)) return std::string(text);
  std::string out;
  composed.toUTF8String(out);
  return out;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

// Visits every code point; malformed sequences are reported as U_SENTINEL (-1).
template <class Fn>
void for_each_code_point(std::string_view text, Fn&& fn) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto n = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    fn(c);
  }
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for_each_code_point(text, [&](UChar32 c) {
    if (c < 0 || u_isUWhiteSpace(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      append_utf8(current, c);
    }
  });
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace

std::string_view to_string(StopWordList list) noexcept {
  switch (list) {
    case StopWordList::None: return "none";
    case StopWordList::En: return "en";
    case StopWordList::Es: return "es";
    case StopWordList::Custom: return "custom";
  }
  return "none";
}

std::string to_lower(std::string_view text) {
  const std::string composed = nfc(text);
  std::string out;
  out.reserve(composed.size());
  for_each_code_point(composed, [&](UChar32 c) {
    if (c >= 0) append_utf8(out, u_tolower(c));
  });
  return out;
}

std::vector<std::string> split_alnum(std::string_view text) {
  const std::string composed = nfc(text);
  std::vector<std::string> out;
  std::string current;
  for_each_code_point(composed, [&](UChar32 c) {
    if (c >= 0 && u_isalnum(c)) {
      append_utf8(current, c);
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  });
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

StopWordSet parse_stopwords(std::string_view content) {
  StopWordSet set;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (auto& token : split_whitespace(line)) set.insert(to_lower(token));
  }
  return set;
}

StopWordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open stop-word list " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_stopwords(buf.str());
}

const StopWordSet& builtin_stopwords(StopWordList list) {
  static const StopWordSet empty;
  static const StopWordSet en = parse_stopwords(detail::kStopwordsEn);
  static const StopWordSet es = parse_stopwords(detail::kStopwordsEs);
  switch (list) {
    case StopWordList::En: return en;
    case StopWordList::Es: return es;
    case StopWordList::None: return empty;
    case StopWordList::Custom: break;
  }
  throw Error(ErrorKind::InvalidArgument, "custom stop-word lists must be loaded from a file");
}

std::string NormalizerConfig::canonical() const {
  std::ostringstream out;
  out << "lowercase=" << lowercase << ";strip_non_alnum=" << strip_non_alnum
      << ";stop_words=" << to_string(stop_words);
  if (stop_words == StopWordList::Custom) {
    std::ifstream in(stop_words_path, std::ios::binary);
    std::ostringstream content;
    content << in.rdbuf();
    out << ":" << fingerprint_of(content.str());
  }
  out << ";stemming=" << to_string(stemming) << ";max_len=";
  if (max_len) out << *max_len;
  else out << "unlimited";
  out << ";pad=" << pad_token << ";unk=" << unk_token;
  return out.str();
}

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens, const StopWordSet& stop_set) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stop_set.contains(t)) out.push_back(t);
  }
  return out;
}

std::vector<std::int32_t> pad_truncate(std::span<const std::int32_t> ids, std::size_t max_len,
                                       std::int32_t pad_id) {
  if (max_len < 1) throw Error(ErrorKind::InvalidArgument, "max_len must be at least 1");
  std::vector<std::int32_t> out(max_len, pad_id);
  const std::size_t n = std::min(max_len, ids.size());
  std::copy_n(ids.begin(), n, out.begin());
  return out;
}

Normalizer::Normalizer(NormalizerConfig config) : config_(std::move(config)) {
  if (config_.pad_token == config_.unk_token) {
    throw Error(ErrorKind::InvalidArgument, "pad and unk tokens must differ");
  }
  if (config_.stop_words == StopWordList::Custom) {
    stop_set_ = std::make_shared<const StopWordSet>(load_stopwords(config_.stop_words_path));
  } else if (config_.stop_words != StopWordList::None) {
    stop_set_ = std::shared_ptr<const StopWordSet>(&builtin_stopwords(config_.stop_words),
                                                   [](const StopWordSet*) {});
  }
}

std::vector<std::string> Normalizer::operator()(std::string_view text) const {
  const std::string cased = config_.lowercase ? to_lower(text) : std::string(text);
  std::vector<std::string> tokens = config_.strip_non_alnum ? split_alnum(cased) : split_whitespace(cased);
  std::erase_if(tokens, [&](const std::string& t) { return t == config_.pad_token || t == config_.unk_token; });
  if (stop_set_) tokens = remove_stopwords(tokens, *stop_set_);
  if (const Stemmer* s = stemmer_for(config_.stemming)) {
    for (auto& t : tokens) t = s->stem(t);
    std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
  }
  return tokens;
}

std::vector<std::string> normalize(std::string_view text, const NormalizerConfig& config) {
  return Normalizer(config)(text);
}

}  // namespace fnd
