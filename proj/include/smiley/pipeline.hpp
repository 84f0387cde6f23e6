#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smiley/metrics.hpp"
#include "smiley/model.hpp"
#include "smiley/sampler.hpp"

namespace smiley {

/// Everything a pipeline run needs, read from one `section.key = value`
/// file. Relative paths resolve against the config file's directory.
struct PipelineConfig {
  std::filesystem::path taxonomy;
  std::filesystem::path corpus;
  std::filesystem::path images;  // base directory for image refs
  std::filesystem::path out;

  std::uint64_t seed = 0;
  unsigned jobs = 1;

  SamplerConfig sampler;
  std::size_t val_per_class = 500;
  std::size_t test_per_class = 1000;

  std::vector<std::size_t> hidden;
  double init_scale = 1.0;
  TrainConfig train;

  std::filesystem::path transfer_dataset;
  std::vector<std::string> transfer_classes;
  TransferMode transfer_mode = TransferMode::Frozen;
  HeadActivation transfer_activation = HeadActivation::Softmax;
  std::size_t transfer_folds = 5;
  TrainConfig transfer_train;

  std::filesystem::path zsl_dataset;
  std::filesystem::path zsl_annotations;  // defaults to the taxonomy

  std::filesystem::path analyze_dataset;       // defaults to transfer_dataset
  std::vector<std::string> analyze_emotions;   // defaults to transfer_classes
  std::filesystem::path analyze_sentiment;     // defaults to zsl_dataset
  std::size_t analyze_top_n = 7;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

/// ConfigError for unknown keys, bad values or a missing file.
PipelineConfig parse_pipeline_config(std::string_view text, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Seed for one stochastic stage, derived from the global seed.
std::uint64_t stage_seed(const PipelineConfig& cfg, std::string_view stage);

/// Target-task record: one image with an integer class label.
struct TargetRecord {
  std::string id;
  std::string image;
  int label = 0;
};

std::vector<TargetRecord> read_target_records(const std::filesystem::path& path);
std::string target_record_to_json(const TargetRecord& rec);

/// Loads PPM images (relative to base) into an N x d tensor; all images
/// must share a shape.
LabeledInputs load_images(const std::filesystem::path& base, const std::vector<std::string>& refs,
                          std::vector<std::vector<int>> labels);

/// mTop-1/3/5 (k <= C) and macro-AUC of the scores, followed by the same
/// metrics for uniform-random scores drawn from random_seed.
std::vector<MetricRow> eval_metric_rows(const Tensor& scores, std::span<const std::vector<int>> labels,
                                        std::uint64_t random_seed);

struct IngestSummary {
  std::size_t records = 0;
  std::size_t accepted = 0;
  std::size_t samples = 0;
  std::map<RejectReason, std::size_t> rejected;
};

// Commands. Each reads its inputs from the config, writes into cfg.out and
// returns normally on success; failures surface as smiley::Error.
IngestSummary cmd_ingest(const PipelineConfig& cfg);
BalancedSampleResult cmd_sample(const PipelineConfig& cfg);
void cmd_stats(const PipelineConfig& cfg);
DatasetSplit cmd_split(const PipelineConfig& cfg);
TrainResult cmd_train(const PipelineConfig& cfg);
std::vector<MetricRow> cmd_eval(const PipelineConfig& cfg);
std::vector<MetricRow> cmd_transfer(const PipelineConfig& cfg);
std::vector<MetricRow> cmd_zsl(const PipelineConfig& cfg);
void cmd_analyze(const PipelineConfig& cfg);

/// Maps an error to the CLI exit code: 2 I/O, 3 config/input, 4
/// compatibility, 5 numeric, 1 anything else.
int exit_code_for(const Error& e);

/// Artifact file names inside cfg.out.
namespace artifacts {
inline constexpr const char* kAccepted = "accepted.jsonl";
inline constexpr const char* kRejects = "rejects.tsv";
inline constexpr const char* kIngestSummary = "ingest_summary.csv";
inline constexpr const char* kDataset = "dataset.jsonl";
inline constexpr const char* kSamplingCells = "sampling_cells.csv";
inline constexpr const char* kRawDistribution = "label_distribution_raw.csv";
inline constexpr const char* kDistribution = "label_distribution.csv";
inline constexpr const char* kCooccurrence = "cooccurrence.csv";
inline constexpr const char* kTrain = "train.jsonl";
inline constexpr const char* kVal = "val.jsonl";
inline constexpr const char* kTest = "test.jsonl";
inline constexpr const char* kModel = "model.ckpt";
inline constexpr const char* kTrainLoss = "train_loss.csv";
inline constexpr const char* kEvalMetrics = "eval_metrics.csv";
inline constexpr const char* kTransferMetrics = "transfer_metrics.csv";
inline constexpr const char* kTransferConfusion = "transfer_confusion.csv";
inline constexpr const char* kTransferModel = "transfer.ckpt";
inline constexpr const char* kZslMetrics = "zsl_metrics.csv";
inline constexpr const char* kFingerprint = "fingerprint.csv";
inline constexpr const char* kTopEmojis = "top_emojis.csv";
inline constexpr const char* kSentimentCorrelation = "sentiment_correlation.csv";
inline constexpr const char* kProjection = "projection.csv";
inline constexpr const char* kProjectionSvg = "projection.svg";
}  // namespace artifacts

}  // namespace smiley
