#include "smiley/synthetic.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "smiley/emoji_core.hpp"
#include "smiley/error.hpp"
#include "smiley/pipeline.hpp"
#include "smiley/sampler.hpp"
#include "smiley/text.hpp"

namespace smiley::synth {
namespace {

namespace fs = std::filesystem;

constexpr char32_t kFixtureKeys[] = {0x263A, 0x1F600, 0x1F602, 0x1F60D, 0x1F61E, 0x1F620, 0x1F622, 0x1F631};
constexpr int kPlanted[] = {3, 5, 0, 2, 4, 1, 7, 6};
constexpr char32_t kForeign = 0x1F6A2;  // ship

std::string padded(char prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06zu", prefix, n);
  return buf;
}

std::string emoji_text(std::span<const int> labels, Pcg32& rng) {
  CodePoints cps;
  for (char ch : std::string_view("look at this ")) cps.push_back(static_cast<char32_t>(ch));
  std::size_t total = 0;
  for (int c : labels) {
    cps.push_back(kFixtureKeys[c]);
    if (kFixtureKeys[c] < 0x10000 || rng.uniform() < 0.2) cps.push_back(0xFE0F);
    ++total;
    if (rng.uniform() < 0.25) {
      cps.push_back(kFixtureKeys[c]);
      ++total;
    }
  }
  if (total < kMaxEmojisPerTweet && rng.uniform() < 0.1) cps.push_back(kForeign);
  return encode_utf8(cps);
}

}  // namespace

PrototypeBank PrototypeBank::make(std::size_t categories, ImageShape shape, std::uint64_t seed) {
  PrototypeBank bank;
  bank.shape = shape;
  Pcg32 rng(seed, 0x70726f746f);
  for (std::size_t c = 0; c < categories; ++c) {
    std::vector<float> p(shape.size());
    for (auto& v : p) v = static_cast<float>(rng.uniform());
    bank.prototypes.push_back(std::move(p));
  }
  return bank;
}

std::vector<float> PrototypeBank::render(std::span<const int> labels, double noise, Pcg32& rng) const {
  if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "render needs at least one label");
  std::vector<float> out(shape.size(), 0.0f);
  for (int c : labels) {
    const auto& p = prototypes.at(static_cast<std::size_t>(c));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p[i];
  }
  for (auto& v : out) {
    const double x = v / static_cast<double>(labels.size()) + noise * rng.normal();
    v = static_cast<float>(std::clamp(x, 0.0, 1.0));
  }
  return out;
}

Tensor PrototypeBank::render_image(std::span<const int> labels, double noise, Pcg32& rng) const {
  return Tensor({shape.height, shape.width, shape.channels}, render(labels, noise, rng));
}

std::string fixture_taxonomy() {
  return "# id\tname\tcodepoints\tsentiment\tzsl_weight\n"
         "0\twhite_smiling_face\tU+263A\tpos\t1\n"
         "1\tgrinning_face\tU+1F600\tpos\t0.5\n"
         "2\tface_with_tears_of_joy\tU+1F602\tpos\t1\n"
         "3\tsmiling_face_with_heart_shaped_eyes\tU+1F60D\tpos\t1\n"
         "4\tdisappointed_face\tU+1F61E\tneg\t-1\n"
         "5\tangry_face\tU+1F620\tneg\t-1\n"
         "6\tcrying_face\tU+1F622\tneg\t-0.5\n"
         "7\tface_screaming_in_fear\tU+1F631\tneg\t-1\n";
}

const std::vector<std::string>& fixture_emotions() {
  static const std::vector<std::string> names = {"amusement", "anger",      "awe",  "contentment",
                                                 "disgust",   "excitement", "fear", "sadness"};
  return names;
}

int planted_emotion(int category) { return kPlanted[category]; }

void write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec) {
  const auto tax = parse_taxonomy(fixture_taxonomy());
  const std::size_t c_count = tax.size();
  write_file(dir / "taxonomy.tsv", fixture_taxonomy());
  const auto bank = PrototypeBank::make(c_count, spec.shape, mix_seed({spec.seed, 1}));
  Pcg32 rng(mix_seed({spec.seed, 2}));

  // Category frequencies fall off by a factor of sqrt(2) per id.
  std::vector<double> cdf;
  double acc = 0.0;
  for (std::size_t c = 0; c < c_count; ++c) cdf.push_back(acc += std::pow(2.0, -0.5 * static_cast<double>(c)));
  auto draw_category = [&] {
    const double u = rng.uniform() * acc;
    return static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  };

  const std::int64_t t0 = epoch_seconds(parse_date("2016-01-01"));
  const std::int64_t span = epoch_seconds(parse_date("2017-01-01")) - t0;

  std::vector<std::string> lines;
  for (std::size_t t = 0; t < spec.tweets; ++t) {
    std::vector<int> labels{draw_category()};
    if (rng.uniform() < 0.25) {
      int second = draw_category();
      if (second != labels[0]) labels.push_back(second);
    }
    std::sort(labels.begin(), labels.end());
    const std::string id = padded('t', t);
    const std::size_t images = rng.uniform() < 0.15 ? 2 : 1;
    nlohmann::ordered_json j;
    j["id"] = id;
    j["ts"] = t0 + static_cast<std::int64_t>(rng.bounded64(static_cast<std::uint64_t>(span)));
    j["text"] = emoji_text(labels, rng);
    std::vector<std::string> refs;
    for (std::size_t k = 0; k < images; ++k) {
      const std::string ref = "images/" + id + "_" + std::to_string(k) + ".ppm";
      save_ppm(dir / ref, bank.render_image(labels, spec.noise, rng));
      refs.push_back(ref);
    }
    j["images"] = refs;
    lines.push_back(j.dump());
  }

  std::size_t next = spec.tweets;
  for (std::size_t r = 0; r < spec.rejects_per_reason; ++r) {
    auto base = [&] {
      nlohmann::ordered_json j;
      j["id"] = padded('t', next++);
      j["ts"] = t0 + static_cast<std::int64_t>(rng.bounded64(static_cast<std::uint64_t>(span)));
      j["text"] = emoji_text(std::vector<int>{draw_category()}, rng);
      j["images"] = std::vector<std::string>{"images/missing.ppm"};
      return j;
    };
    auto j = base();
    j["images"] = std::vector<std::string>{};
    lines.push_back(j.dump());
    j = base();
    j["urls"] = std::vector<std::string>{"https://example.com/x"};
    lines.push_back(j.dump());
    j = base();
    j["hashtags"] = std::vector<std::string>{"sunday"};
    lines.push_back(j.dump());
    j = base();
    j["mentions"] = std::vector<std::string>{"someone"};
    lines.push_back(j.dump());
    j = base();
    j[r % 2 == 0 ? "reply" : "quote"] = true;
    lines.push_back(j.dump());
    j = base();
    j["text"] = encode_utf8(CodePoints{'n', 'o', ' ', kForeign});
    lines.push_back(j.dump());
    j = base();
    j["text"] = encode_utf8(CodePoints(kMaxEmojisPerTweet + 1, kFixtureKeys[1]));
    lines.push_back(j.dump());
    lines.push_back(R"({"id": ")" + padded('t', next++) + R"(", "ts": )");
  }
  rng.shuffle(std::span(lines));
  std::string corpus;
  for (const auto& l : lines) corpus += l + "\n";
  write_file(dir / "corpus.jsonl", corpus);

  std::string emotions;
  std::size_t n = 0;
  for (std::size_t c = 0; c < c_count; ++c) {
    const std::vector<int> labels{static_cast<int>(c)};
    for (std::size_t i = 0; i < spec.emotion_per_class; ++i, ++n) {
      TargetRecord rec{padded('e', n), "emotions/" + padded('e', n) + ".ppm", kPlanted[c]};
      save_ppm(dir / rec.image, bank.render_image(labels, spec.noise, rng));
      emotions += target_record_to_json(rec) + "\n";
    }
  }
  write_file(dir / "emotions.jsonl", emotions);

  std::string sentiment;
  for (std::size_t i = 0; i < spec.sentiment_samples; ++i) {
    const int c = static_cast<int>(rng.bounded(static_cast<std::uint32_t>(c_count)));
    const std::vector<int> labels{c};
    const bool positive = tax[static_cast<std::size_t>(c)].base_sentiment == Sentiment::Positive;
    TargetRecord rec{padded('s', i), "sentiment/" + padded('s', i) + ".ppm", positive ? 1 : 0};
    save_ppm(dir / rec.image, bank.render_image(labels, spec.noise, rng));
    sentiment += target_record_to_json(rec) + "\n";
  }
  write_file(dir / "sentiment.jsonl", sentiment);

  std::string classes;
  for (const auto& e : fixture_emotions()) classes += (classes.empty() ? "" : ",") + e;
  write_file(dir / "pipeline.conf",
             "seed = " + std::to_string(spec.seed) +
                 "\n"
                 "jobs = 1\n"
                 "paths.taxonomy = taxonomy.tsv\n"
                 "paths.corpus = corpus.jsonl\n"
                 "paths.out = out\n"
                 "sampler.window_days = 30\n"
                 "sampler.per_category_cap = 15\n"
                 "sampler.range_start = 2016-01-01\n"
                 "sampler.range_end = 2016-12-31\n"
                 "split.val_per_class = 10\n"
                 "split.test_per_class = 20\n"
                 "model.hidden = 32\n"
                 "train.learning_rate = 0.003\n"
                 "train.batch_size = 64\n"
                 "train.iterations = 600\n"
                 "train.log_every = 50\n"
                 "transfer.dataset = emotions.jsonl\n"
                 "transfer.classes = " + classes +
                 "\n"
                 "transfer.mode = frozen\n"
                 "transfer.folds = 5\n"
                 "transfer.learning_rate = 0.01\n"
                 "transfer.iterations = 300\n"
                 "zsl.dataset = sentiment.jsonl\n"
                 "analyze.top_n = 3\n");
}

}  // namespace smiley::synth
