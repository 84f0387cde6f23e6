#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smiley/emoji_core.hpp"

namespace smiley {

struct TweetRecord {
  std::string id;
  std::int64_t timestamp = 0;  // epoch seconds, UTC
  std::string text;
  std::vector<std::string> image_refs;
  std::vector<std::string> urls;
  std::vector<std::string> hashtags;
  std::vector<std::string> mentions;
  bool is_reply = false;
  bool is_quote = false;
};

/// One image with the emoji labels of the tweet it came from.
struct Sample {
  std::string sample_id;  // "<tweet id>#<image ordinal>"
  std::string image_ref;
  std::vector<int> label_set;  // sorted, unique
  std::int64_t timestamp = 0;
  std::optional<int> window_id;

  bool operator==(const Sample&) const = default;
};

/// Checked in declaration order; the first failing check is reported.
enum class RejectReason {
  NoImage,
  HasUrl,
  HasHashtag,
  HasMention,
  IsReplyOrQuote,
  NoTaxonomyEmoji,
  TooManyEmojis,
  MalformedRecord,
};
inline constexpr int kRejectReasonCount = 8;
inline constexpr std::size_t kMaxEmojisPerTweet = 5;

std::string_view to_string(RejectReason reason);

struct FilterVerdict {
  std::vector<int> label_set;         // set when accepted
  std::optional<RejectReason> reject;  // set when rejected

  bool accepted() const noexcept { return !reject.has_value(); }
};

/// Parses one corpus line. Throws Error(MalformedRecord) naming the byte
/// offset of a syntax error or the offending field.
TweetRecord parse_record(std::string_view line);

FilterVerdict filter_record(const TweetRecord& rec, const EmojiTaxonomy& tax);

/// One sample per image ref, each carrying the tweet's full label set.
std::vector<Sample> records_to_samples(const TweetRecord& rec, std::span<const int> label_set);

std::string tweet_id_of(std::string_view sample_id);

std::string sample_to_json(const Sample& sample);
Sample sample_from_json(std::string_view line);

void write_samples(const std::filesystem::path& path, std::span<const Sample> samples);
std::vector<Sample> read_samples(const std::filesystem::path& path);

}  // namespace smiley
