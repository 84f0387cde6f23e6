#include <doctest.h>

#include "smiley/corpus.hpp"
#include "smiley/error.hpp"
#include "smiley/rng.hpp"
#include "test_util.hpp"

using namespace smiley;

namespace {

const char* kExample =
    R"({"id":"t1","ts":1514764800,"text":"hi 😂","images":["a.ppm"],"urls":[],"hashtags":[],"mentions":[],"reply":false,"quote":false})";

TweetRecord clean_record(std::string text) {
  TweetRecord r;
  r.id = "t1";
  r.timestamp = 1514764800;
  r.text = std::move(text);
  r.image_refs = {"a.ppm"};
  return r;
}

}  // namespace

TEST_CASE("parse_record") {
  const auto r = parse_record(kExample);
  CHECK(r.id == "t1");
  CHECK(r.timestamp == 1514764800);
  CHECK(r.text == "hi \xF0\x9F\x98\x82");
  CHECK(r.image_refs == std::vector<std::string>{"a.ppm"});
  CHECK(r.urls.empty());
  CHECK_FALSE(r.is_reply);
  CHECK_FALSE(r.is_quote);

  const auto two = parse_record(R"({"id":"t2","ts":5,"text":"x","images":["a.ppm","b.ppm"]})");
  CHECK(two.image_refs.size() == 2);
  CHECK(two.hashtags.empty());
  CHECK(two.mentions.empty());

  for (const char* bad : {R"({"ts":1,"text":"x"})", R"({"id":"","ts":1,"text":"x"})", R"({"id":"a","ts":-1,"text":"x"})",
                          R"({"id":"a","ts":"1","text":"x"})", R"({"id":"a","ts":1})", R"([1,2])",
                          R"({"id":"a","ts":1,"text":"x","images":"a.ppm"})", R"({"id":"a","ts":1,"text":"x","reply":"no"})"}) {
    try {
      parse_record(bad);
      FAIL("expected MalformedRecord for " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedRecord);
    }
  }
  try {
    parse_record(R"({"id":"a","ts":)");
    FAIL("expected MalformedRecord");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedRecord);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("filter_record examples") {
  const auto tax = testutil::fixture_taxonomy();
  const std::string joy = "\xF0\x9F\x98\x82";  // face with tears of joy, id 2

  auto v = filter_record(clean_record("yay " + joy), tax);
  REQUIRE(v.accepted());
  CHECK(v.label_set == std::vector<int>{2});

  auto url = clean_record("yay " + joy);
  url.urls = {"http://x"};
  CHECK(filter_record(url, tax).reject == RejectReason::HasUrl);

  std::string six;
  for (int i = 0; i < 6; ++i) six += joy;
  CHECK(filter_record(clean_record(six), tax).reject == RejectReason::TooManyEmojis);

  std::string five;
  for (int i = 0; i < 5; ++i) five += joy;
  CHECK(filter_record(clean_record(five), tax).accepted());

  // Foreign emojis count toward the cap.
  std::string mixed = joy + joy + joy + "\xF0\x9F\x9A\xA2\xF0\x9F\x9A\xA2\xF0\x9F\x9A\xA2";
  CHECK(filter_record(clean_record(mixed), tax).reject == RejectReason::TooManyEmojis);

  CHECK(filter_record(clean_record("only a ship \xF0\x9F\x9A\xA2"), tax).reject == RejectReason::NoTaxonomyEmoji);
  CHECK(filter_record(clean_record("nothing"), tax).reject == RejectReason::NoTaxonomyEmoji);
}

TEST_CASE("rejection reason is the first failing check") {
  const auto tax = testutil::fixture_taxonomy();
  auto r = clean_record("no emoji");
  r.image_refs.clear();
  r.urls = {"u"};
  r.hashtags = {"h"};
  r.mentions = {"m"};
  r.is_reply = true;
  CHECK(filter_record(r, tax).reject == RejectReason::NoImage);
  r.image_refs = {"a.ppm"};
  CHECK(filter_record(r, tax).reject == RejectReason::HasUrl);
  r.urls.clear();
  CHECK(filter_record(r, tax).reject == RejectReason::HasHashtag);
  r.hashtags.clear();
  CHECK(filter_record(r, tax).reject == RejectReason::HasMention);
  r.mentions.clear();
  CHECK(filter_record(r, tax).reject == RejectReason::IsReplyOrQuote);
  r.is_reply = false;
  r.is_quote = true;
  CHECK(filter_record(r, tax).reject == RejectReason::IsReplyOrQuote);
  r.is_quote = false;
  CHECK(filter_record(r, tax).reject == RejectReason::NoTaxonomyEmoji);
}

TEST_CASE("filter is pure") {
  const auto tax = testutil::fixture_taxonomy();
  const auto rec = clean_record("\xF0\x9F\x98\x82\xF0\x9F\x98\xA2 ok");
  const auto a = filter_record(rec, tax);
  const auto b = filter_record(rec, tax);
  CHECK(a.label_set == b.label_set);
  CHECK(a.reject == b.reject);
  CHECK(a.label_set == std::vector<int>{2, 6});
}

TEST_CASE("records_to_samples") {
  auto rec = clean_record("x");
  rec.id = "t9";
  rec.image_refs = {"a.ppm", "b.ppm"};
  const std::vector<int> labels{1, 4};
  const auto samples = records_to_samples(rec, labels);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].sample_id == "t9#0");
  CHECK(samples[1].sample_id == "t9#1");
  CHECK(samples[1].image_ref == "b.ppm");
  for (const auto& s : samples) {
    CHECK(s.label_set == labels);
    CHECK(s.timestamp == rec.timestamp);
    CHECK_FALSE(s.window_id.has_value());
  }
  rec.image_refs = {"only.ppm"};
  CHECK(records_to_samples(rec, labels).size() == 1);
  CHECK(tweet_id_of("t9#1") == "t9");
  CHECK(tweet_id_of("a#b#3") == "a#b");
}

TEST_CASE("accepted label totals never undercut sample counts") {
  const auto tax = testutil::fixture_taxonomy();
  Pcg32 rng(3);
  const char32_t keys[] = {0x1F600, 0x1F602, 0x1F60D, 0x1F61E, 0x1F620, 0x1F622, 0x1F631, 0x1F6A2};
  std::size_t samples = 0, labels = 0;
  for (int i = 0; i < 400; ++i) {
    CodePoints text{'x', ' '};
    const auto n = rng.bounded(7);
    for (std::uint32_t k = 0; k < n; ++k) text.push_back(keys[rng.bounded(8)]);
    auto rec = clean_record(encode_utf8(text));
    rec.id = "t" + std::to_string(i);
    rec.image_refs.assign(rng.bounded(3), "img.ppm");
    const auto v = filter_record(rec, tax);
    if (!v.accepted()) continue;
    CHECK(v.label_set.size() >= 1);
    CHECK(v.label_set.size() <= kMaxEmojisPerTweet);
    for (const auto& s : records_to_samples(rec, v.label_set)) {
      ++samples;
      labels += s.label_set.size();
    }
  }
  CHECK(samples > 0);
  CHECK(labels >= samples);
}

TEST_CASE("sample json round trip") {
  Sample s{"t1#0", "img/a.ppm", {0, 3}, 1500000000, 7};
  CHECK(sample_to_json(s) == R"({"sid":"t1#0","image":"img/a.ppm","labels":[0,3],"ts":1500000000,"win":7})");
  CHECK(sample_from_json(sample_to_json(s)) == s);
  s.window_id.reset();
  CHECK(sample_from_json(sample_to_json(s)) == s);

  testutil::TempDir dir("corpus");
  std::vector<Sample> many{s, Sample{"t2#0", "b.ppm", {1}, 5, 0}};
  write_samples(dir / "s.jsonl", many);
  CHECK(read_samples(dir / "s.jsonl") == many);
  try {
    sample_from_json("{bad");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
}
