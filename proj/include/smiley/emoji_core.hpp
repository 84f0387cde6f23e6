#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smiley {

using CodePoints = std::vector<char32_t>;

enum class Sentiment { Positive, Negative };

struct EmojiCategory {
  int id = 0;
  std::string name;
  CodePoints key;  // canonical form, see normalize_emoji
  std::optional<Sentiment> base_sentiment;
  std::optional<double> zsl_weight;
};

/// Immutable category set. Ids are dense 0..size()-1 in file order and the
/// canonical key index is injective.
class EmojiTaxonomy {
 public:
  EmojiTaxonomy() = default;
  explicit EmojiTaxonomy(std::vector<EmojiCategory> categories);

  std::size_t size() const noexcept { return categories_.size(); }
  const std::vector<EmojiCategory>& categories() const noexcept { return categories_; }
  const EmojiCategory& operator[](std::size_t id) const { return categories_.at(id); }

  std::optional<int> find(const CodePoints& canonical_key) const;

  /// Stable textual form (the taxonomy file format without comments).
  std::string serialize() const;
  /// SHA-256 of serialize(); identifies the label space in checkpoints.
  std::array<std::uint8_t, 32> hash() const;

 private:
  std::vector<EmojiCategory> categories_;
  std::map<CodePoints, int> index_;
};

EmojiTaxonomy parse_taxonomy(std::string_view text);
EmojiTaxonomy load_taxonomy(const std::filesystem::path& path);

/// Strips variation selectors (U+FE00..U+FE0F) and skin-tone modifiers
/// (U+1F3FB..U+1F3FF). Never lengthens the sequence.
CodePoints normalize_emoji(std::span<const char32_t> grapheme);

/// Decodes UTF-8, rejecting overlongs, surrogates and truncated sequences.
CodePoints decode_utf8(std::string_view text);
std::string encode_utf8(std::span<const char32_t> scalars);

struct EmojiScan {
  std::vector<int> label_set;  // sorted, unique taxonomy ids
  std::size_t foreign_emoji_count = 0;
  std::size_t total_emoji_count = 0;  // all emoji occurrences, before dedup
};

EmojiScan extract_emojis(std::string_view utf8_text, const EmojiTaxonomy& tax);

/// "U+1F602,U+FE0F" style formatting.
std::string format_codepoints(std::span<const char32_t> scalars);

}  // namespace smiley
