#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "smiley/error.hpp"
#include "smiley/pipeline.hpp"
#include "smiley/rng.hpp"
#include "smiley/text.hpp"

namespace smiley {
namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw Error(ErrorCode::ConfigError,
              std::string(key) + " = '" + std::string(value) + "': expected " + std::string(expected));
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  auto n = parse_int(v);
  if (!n || *n < 0) bad_value(key, v, "a non-negative integer");
  return static_cast<std::uint64_t>(*n);
}

std::size_t to_positive(std::string_view key, std::string_view v) {
  auto n = parse_int(v);
  if (!n || *n <= 0) bad_value(key, v, "a positive integer");
  return static_cast<std::size_t>(*n);
}

double to_double(std::string_view key, std::string_view v) {
  auto d = parse_double(v);
  if (!d) bad_value(key, v, "a number");
  return *d;
}

double to_positive_double(std::string_view key, std::string_view v) {
  const double d = to_double(key, v);
  if (!(d > 0.0)) bad_value(key, v, "a positive number");
  return d;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

Date to_date(std::string_view key, std::string_view v) {
  try {
    return parse_date(v);
  } catch (const Error&) {
    bad_value(key, v, "a YYYY-MM-DD date");
  }
}

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  for (auto part : split(v, ',')) {
    auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::vector<std::size_t> to_size_list(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  for (const auto& item : to_list(v)) out.push_back(to_positive(key, item));
  return out;
}

CropConfig to_crop(std::string_view key, std::string_view v) {
  auto parts = split(v, 'x');
  if (parts.size() != 2) bad_value(key, v, "HxW");
  CropConfig c;
  c.out_height = to_positive(key, trim(parts[0]));
  c.out_width = to_positive(key, trim(parts[1]));
  return c;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view text, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  cfg.out = "out";
  cfg.sampler.range_start = parse_date("2016-01-01");
  cfg.sampler.range_end = parse_date("2018-07-31");
  cfg.hidden = {};
  bool has_taxonomy = false;
  std::optional<CropConfig> crop;
  double scale_min = 1.0, scale_max = 1.25;
  std::optional<double> transfer_lr;
  std::optional<std::size_t> transfer_batch, transfer_iterations;

  auto path_of = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_absolute() ? p : base_dir / p;
  };

  using Setter = std::function<void(std::string_view key, std::string_view value)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"seed", [&](auto k, auto v) { cfg.seed = to_u64(k, v); }},
      {"jobs", [&](auto k, auto v) { cfg.jobs = static_cast<unsigned>(to_positive(k, v)); }},
      {"paths.taxonomy", [&](auto, auto v) { cfg.taxonomy = path_of(v); has_taxonomy = true; }},
      {"paths.corpus", [&](auto, auto v) { cfg.corpus = path_of(v); }},
      {"paths.images", [&](auto, auto v) { cfg.images = path_of(v); }},
      {"paths.out", [&](auto, auto v) { cfg.out = path_of(v); }},
      {"sampler.window_days", [&](auto k, auto v) { cfg.sampler.window_days = static_cast<int>(to_positive(k, v)); }},
      {"sampler.per_category_cap", [&](auto k, auto v) { cfg.sampler.per_category_cap = to_positive(k, v); }},
      {"sampler.range_start", [&](auto k, auto v) { cfg.sampler.range_start = to_date(k, v); }},
      {"sampler.range_end", [&](auto k, auto v) { cfg.sampler.range_end = to_date(k, v); }},
      {"split.val_per_class", [&](auto k, auto v) { cfg.val_per_class = to_u64(k, v); }},
      {"split.test_per_class", [&](auto k, auto v) { cfg.test_per_class = to_u64(k, v); }},
      {"model.hidden", [&](auto k, auto v) { cfg.hidden = to_size_list(k, v); }},
      {"model.init_scale", [&](auto k, auto v) { cfg.init_scale = to_positive_double(k, v); }},
      {"train.learning_rate", [&](auto k, auto v) { cfg.train.learning_rate = to_positive_double(k, v); }},
      {"train.batch_size", [&](auto k, auto v) { cfg.train.batch_size = to_positive(k, v); }},
      {"train.iterations", [&](auto k, auto v) { cfg.train.iterations = to_positive(k, v); }},
      {"train.log_every", [&](auto k, auto v) { cfg.train.log_every = to_positive(k, v); }},
      {"train.hflip", [&](auto k, auto v) { cfg.train.augment.hflip = to_bool(k, v); }},
      {"train.crop", [&](auto k, auto v) { crop = to_crop(k, v); }},
      {"train.scale_min", [&](auto k, auto v) { scale_min = to_positive_double(k, v); }},
      {"train.scale_max", [&](auto k, auto v) { scale_max = to_positive_double(k, v); }},
      {"train.prob_clamp", [&](auto k, auto v) { cfg.train.prob_clamp = to_positive_double(k, v); }},
      {"transfer.dataset", [&](auto, auto v) { cfg.transfer_dataset = path_of(v); }},
      {"transfer.classes", [&](auto, auto v) { cfg.transfer_classes = to_list(v); }},
      {"transfer.mode",
       [&](auto k, auto v) {
         if (v == "frozen") cfg.transfer_mode = TransferMode::Frozen;
         else if (v == "finetune") cfg.transfer_mode = TransferMode::Finetune;
         else bad_value(k, v, "frozen or finetune");
       }},
      {"transfer.activation",
       [&](auto k, auto v) {
         if (v == "softmax") cfg.transfer_activation = HeadActivation::Softmax;
         else if (v == "sigmoid") cfg.transfer_activation = HeadActivation::Sigmoid;
         else bad_value(k, v, "softmax or sigmoid");
       }},
      {"transfer.folds", [&](auto k, auto v) { cfg.transfer_folds = to_positive(k, v); }},
      {"transfer.learning_rate", [&](auto k, auto v) { transfer_lr = to_positive_double(k, v); }},
      {"transfer.batch_size", [&](auto k, auto v) { transfer_batch = to_positive(k, v); }},
      {"transfer.iterations", [&](auto k, auto v) { transfer_iterations = to_positive(k, v); }},
      {"zsl.dataset", [&](auto, auto v) { cfg.zsl_dataset = path_of(v); }},
      {"zsl.annotations", [&](auto, auto v) { cfg.zsl_annotations = path_of(v); }},
      {"analyze.dataset", [&](auto, auto v) { cfg.analyze_dataset = path_of(v); }},
      {"analyze.emotions", [&](auto, auto v) { cfg.analyze_emotions = to_list(v); }},
      {"analyze.sentiment", [&](auto, auto v) { cfg.analyze_sentiment = path_of(v); }},
      {"analyze.top_n", [&](auto k, auto v) { cfg.analyze_top_n = to_positive(k, v); }},
  };

  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    if (!seen.insert(std::string(key)).second) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
    it->second(key, value);
  }

  if (!has_taxonomy) throw Error(ErrorCode::ConfigError, "paths.taxonomy is required");
  if (cfg.sampler.range_end < cfg.sampler.range_start) {
    throw Error(ErrorCode::ConfigError, "sampler.range_end precedes sampler.range_start");
  }
  if (crop) {
    if (scale_min > scale_max) throw Error(ErrorCode::ConfigError, "train.scale_min exceeds train.scale_max");
    crop->scale_min = scale_min;
    crop->scale_max = scale_max;
    cfg.train.augment.crop = crop;
  }
  if (cfg.images.empty() && !cfg.corpus.empty()) cfg.images = cfg.corpus.parent_path();

  cfg.transfer_train = cfg.train;
  cfg.transfer_train.augment = {};
  if (transfer_lr) cfg.transfer_train.learning_rate = *transfer_lr;
  if (transfer_batch) cfg.transfer_train.batch_size = *transfer_batch;
  if (transfer_iterations) cfg.transfer_train.iterations = *transfer_iterations;

  if (cfg.zsl_annotations.empty()) cfg.zsl_annotations = cfg.taxonomy;
  if (cfg.analyze_dataset.empty()) cfg.analyze_dataset = cfg.transfer_dataset;
  if (cfg.analyze_emotions.empty()) cfg.analyze_emotions = cfg.transfer_classes;
  if (cfg.analyze_sentiment.empty()) cfg.analyze_sentiment = cfg.zsl_dataset;
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("cannot read config: ") + e.what());
  }
  auto cfg = parse_pipeline_config(text, path.parent_path());
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.out) cfg.out = *overrides.out;
  return cfg;
}

std::uint64_t stage_seed(const PipelineConfig& cfg, std::string_view stage) {
  return mix_seed({cfg.seed, fnv1a(stage)});
}

}  // namespace smiley
