#include "mashq/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mashq/error.hpp"
#include "mashq/rng.hpp"

namespace mashq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

void check_obs(const DiscreteHMM& model, std::span<const int> obs) {
  if (obs.empty()) throw Error("empty observation sequence");
  if (model.states() == 0) throw Error("model has no states");
  for (int o : obs)
    if (o < 0 || static_cast<std::size_t>(o) >= model.symbols())
      throw Error("observation symbol " + std::to_string(o) + " out of range");
}

// Maximises sum_j counts[j] * log p[j] over p[j] >= floor, sum_j p[j] = target,
// restricted to the entries flagged free. Falls back to `fallback` when the
// row carries no counts.
void solve_row(std::span<const double> counts, std::span<const char> free, double target, double floor,
               std::span<const double> fallback, std::span<double> out) {
  const std::size_t n = counts.size();
  std::size_t n_free = 0;
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!free[j]) {
      out[j] = 0.0;
      continue;
    }
    ++n_free;
    total += counts[j];
  }
  if (n_free == 0) return;
  if (!(total > 0.0)) {
    for (std::size_t j = 0; j < n; ++j)
      if (free[j]) out[j] = fallback[j];
    return;
  }
  if (floor * static_cast<double>(n_free) >= target) {
    for (std::size_t j = 0; j < n; ++j)
      if (free[j]) out[j] = target / static_cast<double>(n_free);
    return;
  }
  // Water filling: clamp the entries whose proportional share falls below
  // the floor, then share the rest proportionally among the others.
  std::vector<bool> clamped(n, false);
  for (;;) {
    double mass = target;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!free[j]) continue;
      if (clamped[j])
        mass -= floor;
      else
        sum += counts[j];
    }
    bool changed = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!free[j] || clamped[j]) continue;
      const double v = sum > 0.0 ? mass * counts[j] / sum : 0.0;
      if (v < floor) {
        clamped[j] = true;
        changed = true;
      }
    }
    if (changed) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (!free[j]) continue;
      out[j] = clamped[j] ? floor : mass * counts[j] / sum;
    }
    return;
  }
}

}  // namespace

// --- vector quantisation ----------------------------------------------------

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

int quantize(std::span<const double> vector, const Codebook& codebook) {
  if (vector.size() != codebook.dim)
    throw Error("vector dimension " + std::to_string(vector.size()) + " does not match codebook dimension " +
                std::to_string(codebook.dim));
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < codebook.size(); ++k) {
    const double d = squared_distance(vector, codebook.centroids[k]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

std::vector<int> quantize_all(std::span<const std::vector<double>> vectors, const Codebook& codebook) {
  std::vector<int> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(quantize(v, codebook));
  return out;
}

Codebook kmeans(std::span<const std::vector<double>> vectors, std::size_t k, std::uint64_t seed,
                int max_iter, std::vector<double>* distortion) {
  if (k < 1) throw Error("k-means needs k >= 1");
  if (max_iter < 1) throw Error("k-means needs max_iter >= 1");
  if (vectors.empty()) throw Error("k-means on an empty set");
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != dim) throw Error("k-means vectors differ in dimension");

  std::vector<std::vector<double>> distinct(vectors.begin(), vectors.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < k)
    throw Error("k-means: only " + std::to_string(distinct.size()) + " distinct vectors for k = " +
                std::to_string(k));
  Rng rng(seed);
  rng.shuffle(distinct);

  Codebook cb;
  cb.dim = dim;
  cb.centroids.assign(distinct.begin(), distinct.begin() + static_cast<std::ptrdiff_t>(k));

  const std::size_t n = vectors.size();
  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int a = quantize(vectors[i], cb);
      if (a != assign[i]) changed = true;
      assign[i] = a;
      ++count[static_cast<std::size_t>(a)];
    }
    if (!changed) break;

    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (count[static_cast<std::size_t>(assign[i])] <= 1) continue;
        const double d = squared_distance(vectors[i], cb.centroids[static_cast<std::size_t>(assign[i])]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;
      --count[static_cast<std::size_t>(assign[far])];
      assign[far] = static_cast<int>(c);
      count[c] = 1;
      cb.centroids[c] = vectors[far];
    }

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[static_cast<std::size_t>(assign[i])];
      for (std::size_t d = 0; d < dim; ++d) s[d] += vectors[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) cb.centroids[c][d] = sums[c][d] / static_cast<double>(count[c]);
    }
    if (distortion) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        total += squared_distance(vectors[i], cb.centroids[static_cast<std::size_t>(assign[i])]);
      distortion->push_back(total);
    }
  }
  return cb;
}

// --- discrete HMM -----------------------------------------------------------

DiscreteHMM make_left_right(std::size_t states, std::size_t symbols, double exit) {
  if (states < 1 || symbols < 1) throw Error("model needs at least one state and one symbol");
  if (!(exit >= 0.0 && exit < 1.0)) throw Error("exit probability must lie in [0, 1)");
  DiscreteHMM m;
  m.pi.assign(states, 0.0);
  m.pi[0] = 1.0;
  m.A = Matrix(states, states);
  m.B = Matrix(states, symbols, 1.0 / static_cast<double>(symbols));
  m.exit = exit;
  const double weights[3] = {0.6, 0.3, 0.1};
  for (std::size_t i = 0; i < states; ++i) {
    if (i + 1 == states) {
      m.A(i, i) = 1.0 - exit;
      break;
    }
    double sum = 0.0;
    for (std::size_t d = 0; d < 3 && i + d < states; ++d) sum += weights[d];
    for (std::size_t d = 0; d < 3 && i + d < states; ++d) m.A(i, i + d) = weights[d] / sum;
  }
  return m;
}

void check_stochastic(const DiscreteHMM& m, double tol) {
  const std::size_t s = m.states();
  if (s == 0) throw Error("model has no states");
  if (m.A.rows() != s || m.A.cols() != s || m.B.rows() != s || m.B.cols() == 0)
    throw Error("model matrices have inconsistent shapes");
  auto check_row = [tol](std::span<const double> row, double extra, const std::string& what) {
    double sum = extra;
    for (double v : row) {
      if (!(v >= 0.0)) throw Error(what + " has a negative or NaN entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) throw Error(what + " sums to " + std::to_string(sum));
  };
  if (!(m.exit >= 0.0 && m.exit <= 1.0)) throw Error("exit probability out of range");
  check_row(m.pi, 0.0, "initial vector");
  for (std::size_t i = 0; i < s; ++i) {
    check_row(m.A.row(i), i + 1 == s ? m.exit : 0.0, "transition row " + std::to_string(i));
    check_row(m.B.row(i), 0.0, "emission row " + std::to_string(i));
  }
}

bool is_left_right(const DiscreteHMM& m) {
  const std::size_t s = m.states();
  for (std::size_t i = 1; i < s; ++i)
    if (m.pi[i] != 0.0) return false;
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j)
      if (m.A(i, j) != 0.0 && (j < i || j > i + 2)) return false;
  return true;
}

namespace {

// Scaled forward pass. alpha is T x S; scale[t] is the normaliser at t.
// Returns false when some prefix has zero probability.
bool forward_pass(const DiscreteHMM& m, std::span<const int> obs, Matrix& alpha, std::vector<double>& scale) {
  const std::size_t s = m.states();
  const std::size_t t_len = obs.size();
  alpha = Matrix(t_len, s);
  scale.assign(t_len, 0.0);
  for (std::size_t t = 0; t < t_len; ++t) {
    const auto o = static_cast<std::size_t>(obs[t]);
    double c = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      double a;
      if (t == 0) {
        a = m.pi[j];
      } else {
        a = 0.0;
        for (std::size_t i = 0; i < s; ++i) a += alpha(t - 1, i) * m.A(i, j);
      }
      a *= m.B(j, o);
      alpha(t, j) = a;
      c += a;
    }
    if (!(c > 0.0)) return false;
    scale[t] = c;
    for (std::size_t j = 0; j < s; ++j) alpha(t, j) /= c;
  }
  return true;
}

}  // namespace

double loglik_forward(const DiscreteHMM& model, std::span<const int> obs, EndMode end) {
  check_obs(model, obs);
  Matrix alpha;
  std::vector<double> scale;
  if (!forward_pass(model, obs, alpha, scale)) return kNegInf;
  double ll = 0.0;
  for (double c : scale) ll += std::log(c);
  if (end == EndMode::Final) ll += safe_log(alpha(obs.size() - 1, model.states() - 1) * model.exit);
  return ll;
}

ViterbiResult viterbi(const DiscreteHMM& model, std::span<const int> obs, EndMode end) {
  check_obs(model, obs);
  const std::size_t s = model.states();
  const std::size_t t_len = obs.size();

  Matrix log_a(s, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) log_a(i, j) = safe_log(model.A(i, j));

  std::vector<double> delta(s);
  std::vector<double> next(s);
  std::vector<int> back(t_len * s, 0);
  for (std::size_t j = 0; j < s; ++j)
    delta[j] = safe_log(model.pi[j]) + safe_log(model.B(j, static_cast<std::size_t>(obs[0])));

  for (std::size_t t = 1; t < t_len; ++t) {
    const auto o = static_cast<std::size_t>(obs[t]);
    for (std::size_t j = 0; j < s; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (std::size_t i = 0; i < s; ++i) {
        const double v = delta[i] + log_a(i, j);
        if (beats_log(v, best)) {
          best = v;
          arg = static_cast<int>(i);
        }
      }
      next[j] = best + safe_log(model.B(j, o));
      back[t * s + j] = arg;
    }
    delta.swap(next);
  }

  ViterbiResult r;
  r.path.assign(t_len, 0);
  int last = 0;
  double best = kNegInf;
  if (end == EndMode::Final) {
    last = static_cast<int>(s - 1);
    best = delta[s - 1] + safe_log(model.exit);
  } else {
    for (std::size_t j = 0; j < s; ++j)
      if (beats_log(delta[j], best)) {
        best = delta[j];
        last = static_cast<int>(j);
      }
  }
  r.logprob = best;
  r.path[t_len - 1] = last;
  for (std::size_t t = t_len - 1; t > 0; --t)
    r.path[t - 1] = back[t * s + static_cast<std::size_t>(r.path[t])];
  return r;
}

double accumulate_stats(const DiscreteHMM& m, std::span<const int> obs, EndMode end, HmmStats& stats) {
  check_obs(m, obs);
  const std::size_t s = m.states();
  const std::size_t t_len = obs.size();
  Matrix alpha;
  std::vector<double> scale;
  if (!forward_pass(m, obs, alpha, scale)) return kNegInf;

  double ll = 0.0;
  for (double c : scale) ll += std::log(c);
  double c_end = 1.0;
  std::vector<double> beta(s, 1.0);
  if (end == EndMode::Final) {
    c_end = alpha(t_len - 1, s - 1) * m.exit;
    if (!(c_end > 0.0)) return kNegInf;
    ll += std::log(c_end);
    std::fill(beta.begin(), beta.end(), 0.0);
    beta[s - 1] = m.exit / c_end;
  }

  // gamma at T
  {
    const auto o = static_cast<std::size_t>(obs[t_len - 1]);
    for (std::size_t i = 0; i < s; ++i) {
      const double g = alpha(t_len - 1, i) * beta[i];
      stats.emit(i, o) += g;
      if (t_len == 1) stats.pi[i] += g;
    }
    if (end == EndMode::Final) stats.exit += alpha(t_len - 1, s - 1) * m.exit / c_end;
  }

  std::vector<double> prev(s);
  std::vector<double> weighted(s);
  for (std::size_t t = t_len - 1; t > 0; --t) {
    const auto o = static_cast<std::size_t>(obs[t]);
    for (std::size_t j = 0; j < s; ++j) weighted[j] = m.B(j, o) * beta[j] / scale[t];
    const auto o_prev = static_cast<std::size_t>(obs[t - 1]);
    for (std::size_t i = 0; i < s; ++i) {
      double b = 0.0;
      const double a_i = alpha(t - 1, i);
      for (std::size_t j = 0; j < s; ++j) {
        const double x = m.A(i, j) * weighted[j];
        if (x == 0.0) continue;
        b += x;
        stats.trans(i, j) += a_i * x;
      }
      prev[i] = b;
      const double g = a_i * b;
      stats.emit(i, o_prev) += g;
      if (t == 1) stats.pi[i] += g;
    }
    beta.swap(prev);
  }
  return ll;
}

DiscreteHMM reestimate(const DiscreteHMM& structure, const HmmStats& stats, double floor, EndMode end) {
  const std::size_t s = structure.states();
  const std::size_t k = structure.symbols();
  DiscreteHMM out = structure;

  std::vector<char> free(s + 1);
  for (std::size_t i = 0; i < s; ++i) free[i] = structure.pi[i] != 0.0;
  solve_row(stats.pi, {free.data(), s}, 1.0, floor, structure.pi, out.pi);

  std::vector<double> counts(s + 1);
  std::vector<double> fallback(s + 1);
  std::vector<double> result(s + 1);
  for (std::size_t i = 0; i < s; ++i) {
    const bool last = i + 1 == s;
    for (std::size_t j = 0; j < s; ++j) {
      counts[j] = stats.trans(i, j);
      fallback[j] = structure.A(i, j);
      free[j] = structure.A(i, j) != 0.0;
    }
    double target = 1.0;
    std::size_t n = s;
    if (last) {
      if (end == EndMode::Final) {
        counts[s] = stats.exit;
        fallback[s] = structure.exit;
        free[s] = structure.exit != 0.0;
        n = s + 1;
      } else {
        target = 1.0 - structure.exit;
      }
    }
    solve_row({counts.data(), n}, {free.data(), n}, target, floor, {fallback.data(), n}, {result.data(), n});
    for (std::size_t j = 0; j < s; ++j) out.A(i, j) = result[j];
    if (last && end == EndMode::Final) out.exit = result[s];
  }

  const std::vector<char> all(k, 1);
  for (std::size_t i = 0; i < s; ++i)
    solve_row(stats.emit.row(i), all, 1.0, floor, structure.B.row(i), out.B.row(i));
  return out;
}

DiscreteHMM apply_floor(const DiscreteHMM& model, double floor, EndMode end) {
  // With the current probabilities as counts, the constrained maximiser is the
  // model itself whenever it already satisfies the floor.
  HmmStats stats(model.states(), model.symbols());
  stats.pi = model.pi;
  stats.trans = model.A;
  stats.emit = model.B;
  stats.exit = model.exit;
  return reestimate(model, stats, floor, end);
}

BaumWelchResult baum_welch(const DiscreteHMM& model, std::span<const std::vector<int>> sequences,
                           const BaumWelchConfig& cfg) {
  if (sequences.empty()) throw Error("Baum-Welch needs at least one training sequence");
  if (!(cfg.floor > 0.0)) throw Error("probability floor must be positive");
  for (const auto& seq : sequences) check_obs(model, seq);
  check_stochastic(model, 1e-9);

  BaumWelchResult r;
  r.model = apply_floor(model, cfg.floor, cfg.end);

  auto e_step = [&](const DiscreteHMM& m, HmmStats& stats) {
    double total = 0.0;
    for (const auto& seq : sequences) total += accumulate_stats(m, seq, cfg.end, stats);
    return total;
  };

  HmmStats stats(r.model.states(), r.model.symbols());
  double ll = e_step(r.model, stats);
  r.loglik.push_back(ll);
  if (cfg.on_iteration) cfg.on_iteration(0, r.model, ll);

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    DiscreteHMM next = reestimate(r.model, stats, cfg.floor, cfg.end);
    HmmStats next_stats(next.states(), next.symbols());
    const double next_ll = e_step(next, next_stats);
    r.model = std::move(next);
    stats = std::move(next_stats);
    r.loglik.push_back(next_ll);
    if (cfg.on_iteration) cfg.on_iteration(iter, r.model, next_ll);
    const double gain = next_ll - ll;
    ll = next_ll;
    if (gain < cfg.tol) break;
  }
  return r;
}

// --- word models ------------------------------------------------------------

std::size_t WordModel::block_of(std::size_t state) const {
  const auto it = std::upper_bound(anchors.begin(), anchors.end(), static_cast<int>(state));
  return static_cast<std::size_t>(it - anchors.begin()) - 1;
}

WordModel concat(std::span<const DiscreteHMM> models, std::span<const std::string> labels) {
  if (models.empty()) throw Error("concatenation of zero models");
  if (labels.size() != models.size()) throw Error("one label per model is required");
  const std::size_t k = models.front().symbols();
  std::size_t total = 0;
  for (std::size_t b = 0; b < models.size(); ++b) {
    if (models[b].symbols() != k) throw Error("cannot concatenate models over different codebooks");
    if (b + 1 < models.size() && !(models[b].exit > 0.0))
      throw Error("model '" + labels[b] + "' has no exit mass to bridge into the next character");
    total += models[b].states();
  }

  WordModel wm;
  wm.labels.assign(labels.begin(), labels.end());
  DiscreteHMM& h = wm.hmm;
  h.pi.assign(total, 0.0);
  h.A = Matrix(total, total);
  h.B = Matrix(total, k);
  std::size_t off = 0;
  for (std::size_t b = 0; b < models.size(); ++b) {
    const auto& m = models[b];
    const std::size_t s = m.states();
    wm.anchors.push_back(static_cast<int>(off));
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) h.A(off + i, off + j) = m.A(i, j);
      for (std::size_t o = 0; o < k; ++o) h.B(off + i, o) = m.B(i, o);
    }
    if (b == 0)
      for (std::size_t i = 0; i < s; ++i) h.pi[i] = m.pi[i];
    if (b + 1 < models.size())
      h.A(off + s - 1, off + s) = m.exit;
    else
      h.exit = m.exit;
    off += s;
  }
  return wm;
}

}  // namespace mashq
