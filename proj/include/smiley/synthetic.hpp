#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "smiley/model.hpp"
#include "smiley/rng.hpp"

namespace smiley::synth {

/// One random image per category; rendered images average the prototypes
/// of their labels and add Gaussian noise.
struct PrototypeBank {
  ImageShape shape;
  std::vector<std::vector<float>> prototypes;

  static PrototypeBank make(std::size_t categories, ImageShape shape, std::uint64_t seed);
  /// Flattened h x w x c image in [0, 1].
  std::vector<float> render(std::span<const int> labels, double noise, Pcg32& rng) const;
  Tensor render_image(std::span<const int> labels, double noise, Pcg32& rng) const;
};

/// Eight-category taxonomy file used by the fixture corpus.
std::string fixture_taxonomy();
/// Planted emotion for each fixture category (one-to-one).
const std::vector<std::string>& fixture_emotions();
int planted_emotion(int category);

struct FixtureSpec {
  std::size_t tweets = 900;
  std::size_t rejects_per_reason = 3;
  ImageShape shape{4, 4, 3};
  double noise = 0.08;
  std::size_t emotion_per_class = 30;
  std::size_t sentiment_samples = 200;
  std::uint64_t seed = 7;
};

/// Writes taxonomy.tsv, corpus.jsonl, emotions.jsonl, sentiment.jsonl, the
/// PPM images they reference and pipeline.conf into dir.
void write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec = {});

}  // namespace smiley::synth
