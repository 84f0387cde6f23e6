#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <map>

#include "smiley/error.hpp"
#include "smiley/pipeline.hpp"
#include "smiley/text.hpp"

namespace {

void print_rows(const std::vector<smiley::MetricRow>& rows) {
  for (const auto& r : rows) std::cout << r.metric << "\t" << r.key << "\t" << smiley::format_double(r.value) << "\n";
}

int run(const std::string& command, const smiley::PipelineConfig& cfg) {
  using namespace smiley;
  if (command == "ingest") {
    const auto s = cmd_ingest(cfg);
    std::cout << "records\t" << s.records << "\naccepted\t" << s.accepted << "\nsamples\t" << s.samples << "\n";
    for (const auto& [reason, count] : s.rejected) std::cout << to_string(reason) << "\t" << count << "\n";
  } else if (command == "sample") {
    const auto r = cmd_sample(cfg);
    std::cout << "tweets_seen\t" << r.tweets_seen << "\ntweets_kept\t" << r.tweets_kept << "\nsamples\t"
              << r.dataset.size() << "\n";
  } else if (command == "stats") {
    cmd_stats(cfg);
  } else if (command == "split") {
    const auto s = cmd_split(cfg);
    std::cout << "train\t" << s.train.size() << "\nval\t" << s.val.size() << "\ntest\t" << s.test.size() << "\n";
  } else if (command == "train") {
    const auto r = cmd_train(cfg);
    if (!r.history.empty()) std::cout << "final_loss\t" << format_double(r.history.back().loss) << "\n";
  } else if (command == "eval") {
    print_rows(cmd_eval(cfg));
  } else if (command == "transfer") {
    print_rows(cmd_transfer(cfg));
  } else if (command == "zsl") {
    print_rows(cmd_zsl(cfg));
  } else if (command == "analyze") {
    cmd_analyze(cfg);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emoji-embedding benchmark pipeline"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "Filter the raw corpus into accepted samples"},
      {"sample", "Temporal, per-category capped sampling"},
      {"stats", "Label distribution and co-occurrence CSVs"},
      {"split", "Train/val/test split"},
      {"train", "Train the emoji embedder"},
      {"eval", "mTop-k and macro-AUC on the test split"},
      {"transfer", "k-fold transfer to a target task"},
      {"zsl", "Zero-shot sentiment accuracy"},
      {"analyze", "Emotional fingerprint, rankings and projection"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Pipeline config file")->required();
    sub->add_option("--seed", seed, "Override the global seed");
    sub->add_option("--out", out, "Override the output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    smiley::ConfigOverrides overrides;
    overrides.seed = seed;
    if (out) overrides.out = *out;
    const auto cfg = smiley::load_pipeline_config(config_path, overrides);
    return run(command, cfg);
  } catch (const smiley::Error& e) {
    std::cerr << "smileybench " << command << ": " << e.what() << "\n";
    return smiley::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "smileybench " << command << ": " << e.what() << "\n";
    return 1;
  }
}
