#include "smiley/corpus.hpp"

#include <algorithm>
#include <json.hpp>

#include "smiley/error.hpp"
#include "smiley/text.hpp"

namespace smiley {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Error malformed(std::size_t offset, const std::string& what) {
  return Error(ErrorCode::MalformedRecord, what + " (byte " + std::to_string(offset) + ")");
}

std::vector<std::string> string_list(const json& obj, const char* key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw malformed(0, std::string("field '") + key + "' must be an array");
  for (const auto& v : *it) {
    if (!v.is_string()) throw malformed(0, std::string("field '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

bool flag(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return false;
  if (!it->is_boolean()) throw malformed(0, std::string("field '") + key + "' must be boolean");
  return it->get<bool>();
}

}  // namespace

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::NoImage: return "NoImage";
    case RejectReason::HasUrl: return "HasUrl";
    case RejectReason::HasHashtag: return "HasHashtag";
    case RejectReason::HasMention: return "HasMention";
    case RejectReason::IsReplyOrQuote: return "IsReplyOrQuote";
    case RejectReason::NoTaxonomyEmoji: return "NoTaxonomyEmoji";
    case RejectReason::TooManyEmojis: return "TooManyEmojis";
    case RejectReason::MalformedRecord: return "MalformedRecord";
  }
  return "Unknown";
}

TweetRecord parse_record(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw malformed(e.byte, "invalid JSON");
  }
  if (!obj.is_object()) throw malformed(0, "record is not a JSON object");

  TweetRecord rec;
  auto id = obj.find("id");
  if (id == obj.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw malformed(0, "missing or empty 'id'");
  }
  rec.id = id->get<std::string>();

  auto ts = obj.find("ts");
  if (ts == obj.end() || !ts->is_number_integer()) throw malformed(0, "missing integer 'ts'");
  rec.timestamp = ts->get<std::int64_t>();
  if (rec.timestamp < 0) throw malformed(0, "negative 'ts'");

  auto text = obj.find("text");
  if (text == obj.end() || !text->is_string()) throw malformed(0, "missing string 'text'");
  rec.text = text->get<std::string>();

  rec.image_refs = string_list(obj, "images");
  rec.urls = string_list(obj, "urls");
  rec.hashtags = string_list(obj, "hashtags");
  rec.mentions = string_list(obj, "mentions");
  rec.is_reply = flag(obj, "reply");
  rec.is_quote = flag(obj, "quote");
  return rec;
}

FilterVerdict filter_record(const TweetRecord& rec, const EmojiTaxonomy& tax) {
  FilterVerdict v;
  if (rec.image_refs.empty()) {
    v.reject = RejectReason::NoImage;
  } else if (!rec.urls.empty()) {
    v.reject = RejectReason::HasUrl;
  } else if (!rec.hashtags.empty()) {
    v.reject = RejectReason::HasHashtag;
  } else if (!rec.mentions.empty()) {
    v.reject = RejectReason::HasMention;
  } else if (rec.is_reply || rec.is_quote) {
    v.reject = RejectReason::IsReplyOrQuote;
  } else {
    EmojiScan scan;
    try {
      scan = extract_emojis(rec.text, tax);
    } catch (const Error&) {
      v.reject = RejectReason::MalformedRecord;
      return v;
    }
    if (scan.label_set.empty()) {
      v.reject = RejectReason::NoTaxonomyEmoji;
    } else if (scan.total_emoji_count > kMaxEmojisPerTweet) {
      v.reject = RejectReason::TooManyEmojis;
    } else {
      v.label_set = std::move(scan.label_set);
    }
  }
  return v;
}

std::vector<Sample> records_to_samples(const TweetRecord& rec, std::span<const int> label_set) {
  std::vector<Sample> out;
  out.reserve(rec.image_refs.size());
  for (std::size_t i = 0; i < rec.image_refs.size(); ++i) {
    Sample s;
    s.sample_id = rec.id + "#" + std::to_string(i);
    s.image_ref = rec.image_refs[i];
    s.label_set.assign(label_set.begin(), label_set.end());
    s.timestamp = rec.timestamp;
    out.push_back(std::move(s));
  }
  return out;
}

std::string tweet_id_of(std::string_view sample_id) {
  auto pos = sample_id.rfind('#');
  return std::string(pos == std::string_view::npos ? sample_id : sample_id.substr(0, pos));
}

std::string sample_to_json(const Sample& sample) {
  ordered_json obj;
  obj["sid"] = sample.sample_id;
  obj["image"] = sample.image_ref;
  obj["labels"] = sample.label_set;
  obj["ts"] = sample.timestamp;
  if (sample.window_id) obj["win"] = *sample.window_id;
  return obj.dump(-1, ' ', false, json::error_handler_t::strict);
}

Sample sample_from_json(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "dataset record: invalid JSON at byte " + std::to_string(e.byte));
  }
  try {
    Sample s;
    s.sample_id = obj.at("sid").get<std::string>();
    s.image_ref = obj.at("image").get<std::string>();
    s.label_set = obj.at("labels").get<std::vector<int>>();
    std::sort(s.label_set.begin(), s.label_set.end());
    s.label_set.erase(std::unique(s.label_set.begin(), s.label_set.end()), s.label_set.end());
    s.timestamp = obj.at("ts").get<std::int64_t>();
    if (auto win = obj.find("win"); win != obj.end() && !win->is_null()) s.window_id = win->get<int>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("dataset record: ") + e.what());
  }
}

void write_samples(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::string out;
  for (const auto& s : samples) {
    out += sample_to_json(s);
    out.push_back('\n');
  }
  write_file(path, out);
}

std::vector<Sample> read_samples(const std::filesystem::path& path) {
  std::vector<Sample> out;
  const std::string text = read_file(path);
  for (auto line : split_lines(text)) {
    if (trim(line).empty()) continue;
    out.push_back(sample_from_json(line));
  }
  return out;
}

}  // namespace smiley
