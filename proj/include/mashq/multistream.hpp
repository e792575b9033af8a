#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mashq/hmm.hpp"

namespace mashq {

// Reliability weight per stream; non-negative, summing to one.
class StreamWeights {
 public:
  StreamWeights() = default;
  StreamWeights(double first, double second);

  double operator[](std::size_t k) const { return w_[k]; }
  std::span<const double> values() const noexcept { return w_; }
  friend bool operator==(const StreamWeights&, const StreamWeights&) = default;

 private:
  std::array<double, 2> w_{0.5, 0.5};
};

// w * logp, where a zero weight silences its stream entirely (also -inf).
double weighted_log(double weight, double logp);

// Weighted sum of per-stream log-likelihoods.
double fuse_loglik(std::span<const double> stream_logliks, const StreamWeights& weights);

struct Candidate {
  std::string word;
  std::array<double, 2> stream_scores{};  // per-stream log-likelihoods
  double fused = 0.0;
};

// Sorted by fused score descending, then by word.
std::vector<Candidate> rank_words(std::vector<Candidate> candidates, const StreamWeights& weights);

enum class AnchorPolicy { Word, Character };

// Product of two word models over the same character sequence. Under the
// Word policy the chains share only the first and last frame; under the
// Character policy they also enter every character block on the same frame.
struct CompositeHMM {
  WordModel a;
  WordModel b;
  StreamWeights weights;
  AnchorPolicy policy = AnchorPolicy::Word;
  // (state of a, state of b) for every product state, in lexicographic order.
  std::vector<std::pair<int, int>> states;
  // Character block of each product state; -1 when the two components sit in
  // different blocks (possible only under the Word policy).
  std::vector<int> block;

  std::size_t block_size(int character) const;
};

CompositeHMM build_composite(const WordModel& a, const WordModel& b, const StreamWeights& weights,
                             AnchorPolicy policy);

struct CompositeResult {
  double logprob = 0.0;
  std::vector<std::pair<int, int>> path;
};

// Max over pair paths of the weighted score; the lexicographically smaller
// product predecessor wins ties. Throws when the streams differ in length.
CompositeResult viterbi_composite(const CompositeHMM& comp, std::span<const int> obs_a,
                                  std::span<const int> obs_b, EndMode end = EndMode::Any);

}  // namespace mashq
