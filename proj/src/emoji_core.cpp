#include "smiley/emoji_core.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "smiley/error.hpp"
#include "smiley/text.hpp"

namespace smiley {
namespace {

constexpr char32_t kZwj = 0x200D;

bool is_variation_selector(char32_t cp) { return cp >= 0xFE00 && cp <= 0xFE0F; }
bool is_skin_tone(char32_t cp) { return cp >= 0x1F3FB && cp <= 0x1F3FF; }
bool is_regional_indicator(char32_t cp) { return cp >= 0x1F1E6 && cp <= 0x1F1FF; }
bool is_tag(char32_t cp) { return cp >= 0xE0020 && cp <= 0xE007F; }

// Scalars in the BMP that render as emoji without a variation selector.
bool is_default_emoji_bmp(char32_t cp) {
  static constexpr char32_t singles[] = {
      0x231A, 0x231B, 0x23F0, 0x23F3, 0x25FD, 0x25FE, 0x2614, 0x2615, 0x267F,
      0x2693, 0x26A1, 0x26AA, 0x26AB, 0x26BD, 0x26BE, 0x26C4, 0x26C5, 0x26CE,
      0x26D4, 0x26EA, 0x26F2, 0x26F3, 0x26F5, 0x26FA, 0x26FD, 0x2705, 0x270A,
      0x270B, 0x2728, 0x274C, 0x274E, 0x2757, 0x27B0, 0x27BF, 0x2B1B, 0x2B1C,
      0x2B50, 0x2B55};
  if ((cp >= 0x23E9 && cp <= 0x23EC) || (cp >= 0x2648 && cp <= 0x2653) ||
      (cp >= 0x2753 && cp <= 0x2755) || (cp >= 0x2795 && cp <= 0x2797)) {
    return true;
  }
  return std::find(std::begin(singles), std::end(singles), cp) != std::end(singles);
}

// BMP symbols that become emoji when followed by U+FE0F.
bool is_text_default_pictograph(char32_t cp) {
  return cp == 0x00A9 || cp == 0x00AE || cp == 0x203C || cp == 0x2049 || cp == 0x2122 ||
         cp == 0x2139 || cp == 0x24C2 || cp == 0x3030 || cp == 0x303D || cp == 0x3297 ||
         cp == 0x3299 || (cp >= 0x2190 && cp <= 0x21FF) || (cp >= 0x2300 && cp <= 0x23FF) ||
         (cp >= 0x25A0 && cp <= 0x25FF) || (cp >= 0x2600 && cp <= 0x27BF) ||
         (cp >= 0x2934 && cp <= 0x2935) || (cp >= 0x2B00 && cp <= 0x2BFF);
}

bool is_supplementary_pictograph(char32_t cp) { return cp >= 0x1F000 && cp <= 0x1FAFF; }

bool is_emoji_component(char32_t cp) {
  return is_variation_selector(cp) || is_skin_tone(cp) || is_tag(cp) || cp == 0x20E3;
}

bool parse_codepoint(std::string_view tok, char32_t& out) {
  tok = trim(tok);
  if (tok.size() < 3 || (tok[0] != 'U' && tok[0] != 'u') || tok[1] != '+') return false;
  std::string_view hex = tok.substr(2);
  if (hex.size() < 4 || hex.size() > 6) return false;
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
  if (ec != std::errc{} || ptr != hex.data() + hex.size()) return false;
  if (value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) return false;
  out = static_cast<char32_t>(value);
  return true;
}

}  // namespace

EmojiTaxonomy::EmojiTaxonomy(std::vector<EmojiCategory> categories)
    : categories_(std::move(categories)) {
  if (categories_.empty()) throw Error(ErrorCode::EmptyTaxonomy, "taxonomy has no categories");
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    auto& cat = categories_[i];
    if (cat.id != static_cast<int>(i)) {
      throw Error(ErrorCode::ParseError, "category ids must be dense and ordered; got " +
                                             std::to_string(cat.id) + " at row " +
                                             std::to_string(i));
    }
    cat.key = normalize_emoji(cat.key);
    if (cat.key.empty()) {
      throw Error(ErrorCode::ParseError, "category '" + cat.name + "' has an empty key");
    }
    if (cat.zsl_weight) {
      double w = *cat.zsl_weight;
      if (!(w >= -1.0 && w <= 1.0)) {
        throw Error(ErrorCode::ParseError, "zsl weight out of [-1, 1] for '" + cat.name + "'");
      }
      if (cat.base_sentiment) {
        bool positive = *cat.base_sentiment == Sentiment::Positive;
        if ((positive && !(w > 0.0)) || (!positive && !(w < 0.0))) {
          throw Error(ErrorCode::ParseError,
                      "zsl weight sign disagrees with sentiment for '" + cat.name + "'");
        }
      }
    }
    auto [it, inserted] = index_.emplace(cat.key, cat.id);
    if (!inserted) {
      throw Error(ErrorCode::DuplicateCategory,
                  format_codepoints(cat.key) + " used by '" + categories_[it->second].name +
                      "' and '" + cat.name + "'");
    }
  }
}

std::optional<int> EmojiTaxonomy::find(const CodePoints& canonical_key) const {
  auto it = index_.find(canonical_key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string EmojiTaxonomy::serialize() const {
  std::ostringstream out;
  for (const auto& cat : categories_) {
    out << cat.id << '\t' << cat.name << '\t' << format_codepoints(cat.key) << '\t';
    if (!cat.base_sentiment) {
      out << '-';
    } else {
      out << (*cat.base_sentiment == Sentiment::Positive ? "pos" : "neg");
    }
    out << '\t';
    if (cat.zsl_weight) {
      out << format_double(*cat.zsl_weight);
    } else {
      out << '-';
    }
    out << '\n';
  }
  return out.str();
}

std::array<std::uint8_t, 32> EmojiTaxonomy::hash() const {
  std::string text = serialize();
  std::array<std::uint8_t, 32> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest.data());
  return digest;
}

EmojiTaxonomy parse_taxonomy(std::string_view text) {
  std::vector<EmojiCategory> cats;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    auto fail = [&](const std::string& msg) {
      return Error(ErrorCode::ParseError, "taxonomy line " + std::to_string(line_no) + ": " + msg);
    };
    auto fields = split(line, '\t');
    if (fields.size() != 5) throw fail("expected 5 tab-separated fields");

    EmojiCategory cat;
    auto id_text = trim(fields[0]);
    auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), cat.id);
    if (ec != std::errc{} || ptr != id_text.data() + id_text.size()) throw fail("bad id");
    cat.name = std::string(trim(fields[1]));
    if (cat.name.empty()) throw fail("empty name");
    for (auto tok : split(fields[2], ',')) {
      char32_t cp = 0;
      if (!parse_codepoint(tok, cp)) throw fail("malformed codepoint literal '" + std::string(tok) + "'");
      cat.key.push_back(cp);
    }
    auto sent = trim(fields[3]);
    if (sent == "pos") {
      cat.base_sentiment = Sentiment::Positive;
    } else if (sent == "neg") {
      cat.base_sentiment = Sentiment::Negative;
    } else if (sent != "-") {
      throw fail("sentiment must be pos, neg or -");
    }
    auto weight = trim(fields[4]);
    if (weight != "-") {
      auto value = parse_double(weight);
      if (!value) throw fail("bad zsl weight '" + std::string(weight) + "'");
      cat.zsl_weight = *value;
    }
    cats.push_back(std::move(cat));
  }
  if (cats.empty()) throw Error(ErrorCode::EmptyTaxonomy, "taxonomy has no categories");
  return EmojiTaxonomy(std::move(cats));
}

EmojiTaxonomy load_taxonomy(const std::filesystem::path& path) {
  return parse_taxonomy(read_file(path));
}

CodePoints normalize_emoji(std::span<const char32_t> grapheme) {
  CodePoints out;
  out.reserve(grapheme.size());
  for (char32_t cp : grapheme) {
    if (!is_variation_selector(cp) && !is_skin_tone(cp)) out.push_back(cp);
  }
  return out;
}

CodePoints decode_utf8(std::string_view text) {
  CodePoints out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto bad = [&](const char* why) {
    return Error(ErrorCode::EncodingError, std::string(why) + " at byte " + std::to_string(i));
  };
  while (i < n) {
    unsigned char b0 = s[i];
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      throw bad("invalid lead byte");
    }
    if (i + len > n) throw bad("truncated sequence");
    for (int k = 1; k < len; ++k) {
      unsigned char b = s[i + k];
      if ((b & 0xC0) != 0x80) throw bad("invalid continuation byte");
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min) throw bad("overlong encoding");
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) throw bad("invalid scalar value");
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::span<const char32_t> scalars) {
  std::string out;
  for (char32_t cp : scalars) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

EmojiScan extract_emojis(std::string_view utf8_text, const EmojiTaxonomy& tax) {
  const CodePoints text = decode_utf8(utf8_text);
  std::set<char32_t> taxonomy_starts;
  for (const auto& cat : tax.categories()) taxonomy_starts.insert(cat.key.front());

  std::set<int> labels;
  EmojiScan scan;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    char32_t cp = text[i];
    bool next_is_vs16 = i + 1 < n && text[i + 1] == 0xFE0F;
    bool starts_emoji = is_supplementary_pictograph(cp) || is_default_emoji_bmp(cp) ||
                        taxonomy_starts.contains(cp) ||
                        (is_text_default_pictograph(cp) && next_is_vs16);
    if (!starts_emoji) {
      ++i;
      continue;
    }

    std::size_t end = i + 1;
    if (is_regional_indicator(cp) && end < n && is_regional_indicator(text[end])) ++end;
    bool has_zwj = false;
    for (;;) {
      while (end < n && is_emoji_component(text[end])) ++end;
      if (end + 1 < n && text[end] == kZwj && text[end + 1] > 0x7F) {
        has_zwj = true;
        end += 2;
        continue;
      }
      break;
    }

    ++scan.total_emoji_count;
    std::optional<int> id;
    if (!has_zwj) {
      id = tax.find(normalize_emoji(std::span(text).subspan(i, end - i)));
    }
    if (id) {
      labels.insert(*id);
    } else {
      ++scan.foreign_emoji_count;
    }
    i = end;
  }
  scan.label_set.assign(labels.begin(), labels.end());
  return scan;
}

std::string format_codepoints(std::span<const char32_t> scalars) {
  std::string out;
  char buf[16];
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(scalars[i]));
    if (i) out.push_back(',');
    out += buf;
  }
  return out;
}

}  // namespace smiley
