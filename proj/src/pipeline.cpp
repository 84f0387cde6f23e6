#include "smiley/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <thread>

#include "smiley/analysis.hpp"
#include "smiley/corpus.hpp"
#include "smiley/error.hpp"
#include "smiley/rng.hpp"
#include "smiley/text.hpp"

namespace smiley {
namespace {

namespace fs = std::filesystem;

fs::path out_file(const PipelineConfig& cfg, const char* name) { return cfg.out / name; }

void require_file(const fs::path& path, std::string_view what) {
  if (path.empty()) throw Error(ErrorCode::ConfigError, std::string(what) + " path is not configured");
  if (!fs::exists(path)) throw Error(ErrorCode::IoError, std::string(what) + " not found: " + path.string());
}

EmojiTaxonomy taxonomy_of(const PipelineConfig& cfg) {
  require_file(cfg.taxonomy, "taxonomy");
  return load_taxonomy(cfg.taxonomy);
}

std::vector<Sample> samples_in(const PipelineConfig& cfg, const char* name) {
  const auto path = out_file(cfg, name);
  require_file(path, name);
  return read_samples(path);
}

LabeledInputs load_samples(const PipelineConfig& cfg, std::span<const Sample> samples) {
  std::vector<std::string> refs;
  std::vector<std::vector<int>> labels;
  for (const auto& s : samples) {
    refs.push_back(s.image_ref);
    labels.push_back(s.label_set);
  }
  return load_images(cfg.images, refs, std::move(labels));
}

struct TargetSet {
  std::vector<TargetRecord> records;
  LabeledInputs data;
  std::vector<int> labels;
};

TargetSet load_target(const fs::path& path, std::string_view what, std::size_t classes) {
  require_file(path, what);
  TargetSet t;
  t.records = read_target_records(path);
  if (t.records.empty()) throw Error(ErrorCode::EmptyBatch, std::string(what) + " has no records");
  std::vector<std::string> refs;
  std::vector<std::vector<int>> labels;
  for (const auto& r : t.records) {
    if (r.label < 0 || static_cast<std::size_t>(r.label) >= classes) {
      throw Error(ErrorCode::LabelError, std::string(what) + " record '" + r.id + "' has label " +
                                             std::to_string(r.label) + " outside 0.." + std::to_string(classes - 1));
    }
    refs.push_back(r.image);
    labels.push_back({r.label});
    t.labels.push_back(r.label);
  }
  t.data = load_images(path.parent_path(), refs, std::move(labels));
  return t;
}

Checkpoint model_of(const PipelineConfig& cfg, const EmojiTaxonomy& tax) {
  const auto path = out_file(cfg, artifacts::kModel);
  require_file(path, "model checkpoint");
  return load_checkpoint(path, tax);
}

// Network inputs for every row, center-cropped when training cropped.
Tensor model_inputs(const LabeledInputs& data, const AugmentConfig& aug) {
  const std::size_t d = model_input_dim(data, aug);
  Tensor out({data.size(), d});
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto row = eval_input(data, i, aug);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

Tensor subset_rows(const Tensor& t, std::span<const std::size_t> rows) {
  Tensor out({rows.size(), t.dim(1)});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = t.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::string loss_csv(std::span<const LossPoint> history) {
  std::string out = "iteration,loss\n";
  for (const auto& p : history) out += std::to_string(p.iteration) + "," + format_double(p.loss) + "\n";
  return out;
}

struct LineResult {
  std::vector<Sample> samples;
  std::optional<RejectReason> reject;
  bool blank = false;
};

LineResult ingest_line(std::string_view line, const EmojiTaxonomy& tax) {
  LineResult r;
  if (trim(line).empty()) {
    r.blank = true;
    return r;
  }
  TweetRecord rec;
  try {
    rec = parse_record(line);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MalformedRecord && e.code() != ErrorCode::EncodingError) throw;
    r.reject = RejectReason::MalformedRecord;
    return r;
  }
  FilterVerdict v;
  try {
    v = filter_record(rec, tax);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EncodingError) throw;
    r.reject = RejectReason::MalformedRecord;
    return r;
  }
  if (!v.accepted()) {
    r.reject = v.reject;
    return r;
  }
  r.samples = records_to_samples(rec, v.label_set);
  return r;
}

}  // namespace

std::vector<TargetRecord> read_target_records(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<TargetRecord> out;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TargetRecord r;
      r.id = j.at("id").get<std::string>();
      r.image = j.at("image").get<std::string>();
      r.label = j.at("label").get<int>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string target_record_to_json(const TargetRecord& rec) {
  nlohmann::ordered_json j;
  j["id"] = rec.id;
  j["image"] = rec.image;
  j["label"] = rec.label;
  return j.dump();
}

LabeledInputs load_images(const std::filesystem::path& base, const std::vector<std::string>& refs,
                          std::vector<std::vector<int>> labels) {
  if (refs.size() != labels.size()) throw Error(ErrorCode::ShapeError, "load_images: refs and labels differ in length");
  LabeledInputs data;
  data.labels = std::move(labels);
  if (refs.empty()) {
    data.inputs = Tensor({0, 0});
    return data;
  }
  std::vector<float> flat;
  ImageShape shape;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const Tensor img = load_ppm(base / refs[i]);
    const ImageShape s{img.dim(0), img.dim(1), img.dim(2)};
    if (i == 0) {
      shape = s;
      flat.reserve(refs.size() * shape.size());
    } else if (!(s == shape)) {
      throw Error(ErrorCode::ShapeError, "image " + refs[i] + " is " + shape_string(img.shape()) +
                                             ", expected " + shape_string({shape.height, shape.width, shape.channels}));
    }
    flat.insert(flat.end(), img.data().begin(), img.data().end());
  }
  data.inputs = Tensor({refs.size(), shape.size()}, std::move(flat));
  data.image_shape = shape;
  return data;
}

std::vector<MetricRow> eval_metric_rows(const Tensor& scores, std::span<const std::vector<int>> labels,
                                        std::uint64_t random_seed) {
  auto rows_for = [&](const Tensor& s, const std::string& prefix) {
    std::vector<MetricRow> rows;
    const auto batch = PredictionBatch::from(s, labels);
    for (std::size_t k : {1, 3, 5}) {
      if (k > batch.cols) continue;
      rows.push_back({prefix + "mtop", std::to_string(k), mtopk(batch, k).value});
    }
    const auto auc = macro_auc(batch);
    rows.push_back({prefix + "macro_auc", "all", auc.value});
    rows.push_back({prefix + "auc_classes", "evaluated", static_cast<double>(auc.evaluated)});
    return rows;
  };
  auto rows = rows_for(scores, "");
  Tensor random(scores.shape());
  Pcg32 rng(random_seed);
  for (auto& v : random.data()) v = static_cast<float>(rng.uniform());
  auto baseline = rows_for(random, "random_");
  rows.insert(rows.end(), baseline.begin(), baseline.end());
  return rows;
}

IngestSummary cmd_ingest(const PipelineConfig& cfg) {
  const auto tax = taxonomy_of(cfg);
  require_file(cfg.corpus, "corpus");
  const std::string text = read_file(cfg.corpus);
  const auto lines = split_lines(text);

  std::vector<LineResult> results(lines.size());
  const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, std::max<std::size_t>(lines.size(), 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < lines.size(); ++i) results[i] = ingest_line(lines[i], tax);
  } else {
    // Contiguous chunks, merged in line order below, so output is unaffected.
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(jobs);
    const std::size_t chunk = (lines.size() + jobs - 1) / jobs;
    for (std::size_t j = 0; j < jobs; ++j) {
      workers.emplace_back([&, j] {
        try {
          const std::size_t end = std::min(lines.size(), (j + 1) * chunk);
          for (std::size_t i = j * chunk; i < end; ++i) results[i] = ingest_line(lines[i], tax);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  IngestSummary summary;
  std::vector<Sample> accepted;
  std::string rejects;
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& r = results[i];
    if (r.blank) continue;
    ++summary.records;
    if (r.reject) {
      ++summary.rejected[*r.reject];
      rejects += std::string(lines[i]) + "\t" + std::string(to_string(*r.reject)) + "\n";
      continue;
    }
    ++summary.accepted;
    summary.samples += r.samples.size();
    std::move(r.samples.begin(), r.samples.end(), std::back_inserter(accepted));
  }

  write_samples(out_file(cfg, artifacts::kAccepted), accepted);
  write_file(out_file(cfg, artifacts::kRejects), rejects);
  std::string csv = "reason,count\n";
  csv += "records," + std::to_string(summary.records) + "\n";
  csv += "accepted," + std::to_string(summary.accepted) + "\n";
  csv += "samples," + std::to_string(summary.samples) + "\n";
  for (const auto& [reason, count] : summary.rejected) csv += std::string(to_string(reason)) + "," + std::to_string(count) + "\n";
  write_file(out_file(cfg, artifacts::kIngestSummary), csv);
  return summary;
}

BalancedSampleResult cmd_sample(const PipelineConfig& cfg) {
  const auto tax = taxonomy_of(cfg);
  const auto accepted = samples_in(cfg, artifacts::kAccepted);
  SamplerConfig sc = cfg.sampler;
  sc.seed = stage_seed(cfg, "sample");
  auto result = balanced_sample(accepted, tax.size(), sc);
  write_samples(out_file(cfg, artifacts::kDataset), result.dataset);
  std::string csv = "window,category,seen,selected\n";
  for (const auto& [key, stats] : result.cells) {
    csv += std::to_string(key.first) + "," + std::to_string(key.second) + "," + std::to_string(stats.seen) + "," +
           std::to_string(stats.selected) + "\n";
  }
  write_file(out_file(cfg, artifacts::kSamplingCells), csv);
  return result;
}

void cmd_stats(const PipelineConfig& cfg) {
  const auto tax = taxonomy_of(cfg);
  const auto dataset = samples_in(cfg, artifacts::kDataset);
  write_file(out_file(cfg, artifacts::kDistribution), label_stats_csv(label_distribution(dataset, tax.size()), tax));
  write_file(out_file(cfg, artifacts::kCooccurrence), cooccurrence_csv(cooccurrence_matrix(dataset, tax.size()), tax));
  const auto accepted_path = out_file(cfg, artifacts::kAccepted);
  if (fs::exists(accepted_path)) {
    const auto accepted = read_samples(accepted_path);
    write_file(out_file(cfg, artifacts::kRawDistribution), label_stats_csv(label_distribution(accepted, tax.size()), tax));
  }
}

DatasetSplit cmd_split(const PipelineConfig& cfg) {
  const auto tax = taxonomy_of(cfg);
  const auto dataset = samples_in(cfg, artifacts::kDataset);
  auto split = split_dataset(dataset, tax.size(), cfg.val_per_class, cfg.test_per_class, stage_seed(cfg, "split"));
  for (int c : split.empty_categories) {
    std::cerr << "warning: category " << c << " (" << tax[static_cast<std::size_t>(c)].name << ") has no samples\n";
  }
  write_samples(out_file(cfg, artifacts::kTrain), split.train);
  write_samples(out_file(cfg, artifacts::kVal), split.val);
  write_samples(out_file(cfg, artifacts::kTest), split.test);
  return split;
}

TrainResult cmd_train(const PipelineConfig& cfg) {
  const auto tax = taxonomy_of(cfg);
  const auto train = samples_in(cfg, artifacts::kTrain);
  if (train.empty()) throw Error(ErrorCode::EmptyBatch, "training split is empty");
  const auto data = load_samples(cfg, train);

  ModelConfig mc;
  mc.input_dim = model_input_dim(data, cfg.train.augment);
  mc.embed_dim = tax.size();
  mc.hidden = cfg.hidden;
  mc.init_scale = cfg.init_scale;
  mc.seed = stage_seed(cfg, "init");
  TrainConfig tc = cfg.train;
  tc.seed = stage_seed(cfg, "train");

  TrainResult result;
  try {
    result = train_embedder(data, mc, tc);
  } catch (const TrainingAborted& e) {
    save_checkpoint(out_file(cfg, "model.last_good.ckpt"), e.last_good(), nullptr, tax, cfg.seed);
    throw;
  }
  save_checkpoint(out_file(cfg, artifacts::kModel), result.params, nullptr, tax, cfg.seed);
  write_file(out_file(cfg, artifacts::kTrainLoss), loss_csv(result.history));
  return result;
}

std::vector<MetricRow> cmd_eval(const PipelineConfig& cfg) {
  const auto tax = taxonomy_of(cfg);
  const auto ckpt = model_of(cfg, tax);
  const auto test = samples_in(cfg, artifacts::kTest);
  if (test.empty()) throw Error(ErrorCode::EmptyBatch, "test split is empty");
  const auto data = load_samples(cfg, test);
  const auto probs = predict_probabilities(ckpt.embedder, data, cfg.train.augment);
  auto rows = eval_metric_rows(probs, data.labels, stage_seed(cfg, "eval-random"));
  write_file(out_file(cfg, artifacts::kEvalMetrics), metric_csv(rows));
  return rows;
}

std::vector<MetricRow> cmd_transfer(const PipelineConfig& cfg) {
  const auto tax = taxonomy_of(cfg);
  const auto ckpt = model_of(cfg, tax);
  const std::size_t classes = cfg.transfer_classes.size();
  if (classes < 2) throw Error(ErrorCode::ConfigError, "transfer.classes needs at least two names");
  if (cfg.transfer_activation == HeadActivation::Sigmoid && classes != 2) {
    throw Error(ErrorCode::ConfigError, "a sigmoid transfer head needs exactly two classes");
  }
  const auto target = load_target(cfg.transfer_dataset, "transfer dataset", classes);
  const Tensor inputs = model_inputs(target.data, cfg.train.augment);

  TransferConfig tc;
  tc.classes = classes;
  tc.activation = cfg.transfer_activation;
  tc.mode = cfg.transfer_mode;
  tc.train = cfg.transfer_train;

  const auto embeddings = Matrix::from_tensor(predict_logits(ckpt.embedder, target.data, cfg.train.augment));
  const auto parts = kfold_partition(target.records.size(), cfg.transfer_folds, stage_seed(cfg, "transfer-folds"));

  std::vector<MetricRow> rows;
  std::vector<int> all_pred, all_true;
  double acc_sum = 0.0, knn_sum = 0.0;
  for (std::size_t f = 0; f < parts.size(); ++f) {
    std::vector<std::size_t> train_idx;
    for (std::size_t g = 0; g < parts.size(); ++g) {
      if (g != f) train_idx.insert(train_idx.end(), parts[g].begin(), parts[g].end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::vector<int> train_labels;
    for (auto i : train_idx) train_labels.push_back(target.labels[i]);

    tc.train.seed = mix_seed({stage_seed(cfg, "transfer"), f});
    const auto fit = train_transfer(ckpt.embedder, subset_rows(inputs, train_idx), train_labels, tc);

    Matrix train_emb(train_idx.size(), embeddings.cols);
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
      for (std::size_t c = 0; c < embeddings.cols; ++c) train_emb(r, c) = embeddings(train_idx[r], c);
    }

    std::vector<int> pred, knn_pred, truth;
    for (auto i : parts[f]) {
      pred.push_back(predict_class(fit.embedder, fit.head, inputs.row(i)));
      std::span<const double> q(embeddings.data.data() + i * embeddings.cols, embeddings.cols);
      knn_pred.push_back(knn_classify(train_emb, train_labels, q, 1));
      truth.push_back(target.labels[i]);
    }
    const double acc = accuracy(pred, truth);
    const double knn = accuracy(knn_pred, truth);
    acc_sum += acc;
    knn_sum += knn;
    rows.push_back({"accuracy", "fold" + std::to_string(f), acc});
    rows.push_back({"knn_accuracy", "fold" + std::to_string(f), knn});
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
    all_true.insert(all_true.end(), truth.begin(), truth.end());
  }
  const double folds = static_cast<double>(parts.size());
  rows.push_back({"accuracy", "mean", acc_sum / folds});
  rows.push_back({"knn_accuracy", "mean", knn_sum / folds});

  write_file(out_file(cfg, artifacts::kTransferMetrics), metric_csv(rows));
  write_file(out_file(cfg, artifacts::kTransferConfusion),
             confusion_csv(confusion(all_pred, all_true, classes), cfg.transfer_classes));

  tc.train.seed = stage_seed(cfg, "transfer-final");
  const auto final_fit = train_transfer(ckpt.embedder, inputs, target.labels, tc);
  save_checkpoint(out_file(cfg, artifacts::kTransferModel), final_fit.embedder, &final_fit.head, tax, cfg.seed);
  return rows;
}

std::vector<MetricRow> cmd_zsl(const PipelineConfig& cfg) {
  const auto tax = taxonomy_of(cfg);
  const auto ckpt = model_of(cfg, tax);
  require_file(cfg.zsl_annotations, "zsl annotations");
  const auto annotations = load_taxonomy(cfg.zsl_annotations);
  if (annotations.size() != tax.size()) {
    throw Error(ErrorCode::ConfigError, "zsl annotations cover " + std::to_string(annotations.size()) +
                                            " categories, taxonomy has " + std::to_string(tax.size()));
  }
  for (std::size_t c = 0; c < tax.size(); ++c) {
    if (annotations[c].key != tax[c].key) {
      throw Error(ErrorCode::ConfigError, "zsl annotation row " + std::to_string(c) + " does not match the taxonomy");
    }
  }
  // Labels: 1 = positive, 0 = negative.
  const auto target = load_target(cfg.zsl_dataset, "zsl dataset", 2);
  const auto logits = predict_logits(ckpt.embedder, target.data, cfg.train.augment);

  std::vector<MetricRow> rows;
  for (auto [mode, key] : {std::pair{ZslMode::Binary, "bin"}, std::pair{ZslMode::Continuous, "con"}}) {
    const auto w = zsl_weights(annotations, mode);
    std::vector<int> pred;
    for (std::size_t i = 0; i < target.labels.size(); ++i) pred.push_back(zsl_score(logits.row(i), w) >= 0.0 ? 1 : 0);
    rows.push_back({"zsl_accuracy", key, accuracy(pred, target.labels)});
  }
  write_file(out_file(cfg, artifacts::kZslMetrics), metric_csv(rows));
  return rows;
}

void cmd_analyze(const PipelineConfig& cfg) {
  const auto tax = taxonomy_of(cfg);
  const auto ckpt = model_of(cfg, tax);
  const auto& emotions = cfg.analyze_emotions;
  if (emotions.size() < 2) throw Error(ErrorCode::ConfigError, "analyze.emotions needs at least two names");
  const auto target = load_target(cfg.analyze_dataset, "emotion dataset", emotions.size());
  const auto probs = predict_probabilities(ckpt.embedder, target.data, cfg.train.augment);

  const auto fp = fingerprint(probs, target.labels, emotions);
  write_file(out_file(cfg, artifacts::kFingerprint), fingerprint_csv(fp, tax));

  std::string top = "emotion,rank,category,value\n";
  for (std::size_t e = 0; e < emotions.size(); ++e) {
    const auto col = fp.column(e);
    const auto ranked = rank_top(std::span<const std::optional<double>>(col), cfg.analyze_top_n);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      top += csv_escape(emotions[e]) + "," + std::to_string(r + 1) + "," +
             csv_escape(tax[static_cast<std::size_t>(ranked[r].id)].name) + "," + format_double(ranked[r].value) + "\n";
    }
  }
  write_file(out_file(cfg, artifacts::kTopEmojis), top);

  const auto proj = project_2d(probs, target.labels);
  std::vector<std::string> ids;
  for (const auto& r : target.records) ids.push_back(r.id);
  write_file(out_file(cfg, artifacts::kProjection), projection_csv(proj, ids));
  write_file(out_file(cfg, artifacts::kProjectionSvg), projection_svg(proj, emotions));

  if (!cfg.analyze_sentiment.empty()) {
    const auto senti = load_target(cfg.analyze_sentiment, "sentiment dataset", 2);
    const auto sprobs = predict_probabilities(ckpt.embedder, senti.data, cfg.train.augment);
    std::vector<std::uint8_t> positive(senti.labels.begin(), senti.labels.end());
    const auto rho = correlate_dimensions(sprobs, positive);
    std::string csv = "category,spearman\n";
    for (std::size_t c = 0; c < rho.size(); ++c) {
      csv += csv_escape(tax[c].name) + "," + (rho[c] ? format_double(*rho[c]) : std::string("NA")) + "\n";
    }
    write_file(out_file(cfg, artifacts::kSentimentCorrelation), csv);
  }
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::IoError:
      return 2;
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError:
    case ErrorCode::AnnotationError:
    case ErrorCode::EmptyTaxonomy:
    case ErrorCode::DuplicateCategory:
      return 3;
    case ErrorCode::CompatibilityError:
      return 4;
    case ErrorCode::NumericError:
      return 5;
    default:
      return 1;
  }
}

}  // namespace smiley
