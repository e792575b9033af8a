#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mashq {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// --- vector quantisation ----------------------------------------------------

struct Codebook {
  std::size_t dim = 0;
  std::vector<std::vector<double>> centroids;

  std::size_t size() const noexcept { return centroids.size(); }
  friend bool operator==(const Codebook&, const Codebook&) = default;
};

// Lloyd's algorithm from k distinct seeded-shuffle picks. Empty clusters are
// re-seeded with the point farthest from its centroid. When `distortion` is
// given, the total squared distortion after every iteration is appended.
Codebook kmeans(std::span<const std::vector<double>> vectors, std::size_t k, std::uint64_t seed,
                int max_iter, std::vector<double>* distortion = nullptr);

double squared_distance(std::span<const double> a, std::span<const double> b);

// Nearest centroid, lowest index on ties.
int quantize(std::span<const double> vector, const Codebook& codebook);
std::vector<int> quantize_all(std::span<const std::vector<double>> vectors, const Codebook& codebook);

// --- discrete HMM -----------------------------------------------------------

// Discrete-emission HMM. The last state may also leave the model with
// probability `exit`; for every state i the outgoing mass
// sum_j A(i, j) + [i == S-1] * exit equals one.
struct DiscreteHMM {
  std::vector<double> pi;
  Matrix A;
  Matrix B;
  double exit = 0.0;

  std::size_t states() const noexcept { return pi.size(); }
  std::size_t symbols() const noexcept { return B.cols(); }
  friend bool operator==(const DiscreteHMM&, const DiscreteHMM&) = default;
};

// How a sequence must end. Any: the path may end in any state. Final: the
// path ends in the last state and pays the exit probability.
enum class EndMode { Any, Final };

// Self-loop, advance-by-one and skip-one transitions; uniform emissions;
// all initial mass on state 0.
DiscreteHMM make_left_right(std::size_t states, std::size_t symbols, double exit = 0.3);

// Throws Error when a probability row does not sum to one within tol or a
// value is negative.
void check_stochastic(const DiscreteHMM& model, double tol = 1e-12);
// A(i, j) == 0 unless j - i in {0, 1, 2}, and pi concentrated on state 0.
bool is_left_right(const DiscreteHMM& model);

double loglik_forward(const DiscreteHMM& model, std::span<const int> obs, EndMode end = EndMode::Any);

// Decoders treat log scores this close as tied, so that exact ties split by
// rounding still go to the smaller state.
inline bool beats_log(double v, double best) {
  if (std::isinf(best)) return v > best;
  return v > best + 1e-12 * std::max(1.0, std::abs(best));
}

struct ViterbiResult {
  double logprob = 0.0;
  std::vector<int> path;
};

// Max-product decode in log space. Ties (see beats_log) go to the smaller
// predecessor state, and to the smaller final state.
ViterbiResult viterbi(const DiscreteHMM& model, std::span<const int> obs, EndMode end = EndMode::Any);

// Expected counts gathered by the E-step.
struct HmmStats {
  std::vector<double> pi;
  Matrix trans;
  Matrix emit;
  double exit = 0.0;

  HmmStats() = default;
  HmmStats(std::size_t states, std::size_t symbols)
      : pi(states, 0.0), trans(states, states), emit(states, symbols) {}
};

// Adds the posterior counts of one sequence to `stats`; returns its loglik.
// Sequences with zero likelihood contribute nothing and return -inf.
double accumulate_stats(const DiscreteHMM& model, std::span<const int> obs, EndMode end,
                        HmmStats& stats);

// Constrained M-step: every parameter that is non-zero in `structure` is
// re-estimated subject to a lower bound of `floor`; structural zeros stay
// zero. Under EndMode::Any the exit probability is held fixed. Rows without
// any counts keep the values of `structure`.
DiscreteHMM reestimate(const DiscreteHMM& structure, const HmmStats& stats, double floor, EndMode end);

// Projects a model onto the floored parameter set (same structure).
DiscreteHMM apply_floor(const DiscreteHMM& model, double floor, EndMode end);

struct BaumWelchConfig {
  int max_iter = 20;
  double tol = 1e-6;
  double floor = 1e-6;
  EndMode end = EndMode::Any;
  // Called with the iteration index (0 = floored initial model), the model and
  // the total loglik of the training data under it.
  std::function<void(int, const DiscreteHMM&, double)> on_iteration;
};

struct BaumWelchResult {
  DiscreteHMM model;
  std::vector<double> loglik;  // entry i: total loglik of the model after i updates
};

BaumWelchResult baum_welch(const DiscreteHMM& model, std::span<const std::vector<int>> sequences,
                           const BaumWelchConfig& cfg);

// --- word models ------------------------------------------------------------

struct WordModel {
  DiscreteHMM hmm;
  std::vector<int> anchors;  // first state of each character block
  std::vector<std::string> labels;

  std::size_t block_of(std::size_t state) const;
  friend bool operator==(const WordModel&, const WordModel&) = default;
};

// Chains the models left to right; each block's exit mass becomes the bridge
// into the next block's state 0, and the last block's exit is the word exit.
WordModel concat(std::span<const DiscreteHMM> models, std::span<const std::string> labels);

}  // namespace mashq
