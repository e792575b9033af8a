#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "mashq/features.hpp"
#include "mashq/multistream.hpp"

namespace mashq {

// Every tunable of the pipeline. Serialised as flat `key = value` lines.
struct Config {
  FeatureConfig features;

  // vector quantisation and models
  std::size_t codebook_size = 64;
  int kmeans_iters = 50;
  int states_per_char = 4;
  double exit_init = 0.3;
  int em_iters = 10;
  double floor = 1e-6;
  StreamWeights weights{0.5, 0.5};

  // page and word preprocessing
  bool median = true;
  double line_alpha = 0.05;
  int word_gap = 3;
  double skew_range = 20.0;
  double skew_step = 0.5;

  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const Config&, const Config&) = default;
};

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

std::string format_config(const Config& cfg);
// Unknown keys and malformed values are errors; missing keys keep defaults.
Config parse_config(std::string_view text);
Config read_config(const std::string& path);

}  // namespace mashq
