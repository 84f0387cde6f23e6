#include <CLI11.hpp>

#include <iostream>

#include "smiley/error.hpp"
#include "smiley/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic fixture corpus with images and a pipeline config"};
  std::string out;
  smiley::synth::FixtureSpec spec;
  app.add_option("--out", out, "Destination directory")->required();
  app.add_option("--tweets", spec.tweets, "Number of accepted-style tweets");
  app.add_option("--seed", spec.seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);
  try {
    smiley::synth::write_fixture(out, spec);
  } catch (const smiley::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
