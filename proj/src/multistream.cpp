#include "mashq/multistream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mashq/error.hpp"

namespace mashq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

StreamWeights::StreamWeights(double first, double second) : w_{first, second} {
  if (!(first >= 0.0 && second >= 0.0)) throw Error("stream weights must be non-negative");
  if (std::abs(first + second - 1.0) > 1e-12) throw Error("stream weights must sum to one");
}

double weighted_log(double weight, double logp) { return weight == 0.0 ? 0.0 : weight * logp; }

double fuse_loglik(std::span<const double> stream_logliks, const StreamWeights& weights) {
  if (stream_logliks.size() != weights.values().size()) throw Error("one log-likelihood per stream is required");
  double sum = 0.0;
  for (std::size_t k = 0; k < stream_logliks.size(); ++k) sum += weighted_log(weights[k], stream_logliks[k]);
  return sum;
}

std::vector<Candidate> rank_words(std::vector<Candidate> candidates, const StreamWeights& weights) {
  if (candidates.empty()) throw Error("no candidates to rank");
  for (auto& c : candidates) c.fused = fuse_loglik(c.stream_scores, weights);
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.fused != y.fused) return x.fused > y.fused;
    return x.word < y.word;
  });
  return candidates;
}

std::size_t CompositeHMM::block_size(int character) const {
  return static_cast<std::size_t>(std::count(block.begin(), block.end(), character));
}

CompositeHMM build_composite(const WordModel& a, const WordModel& b, const StreamWeights& weights,
                             AnchorPolicy policy) {
  if (a.labels != b.labels) throw Error("composite streams must spell the same character sequence");
  CompositeHMM c{a, b, weights, policy, {}, {}};
  const std::size_t sa = a.hmm.states();
  const std::size_t sb = b.hmm.states();
  for (std::size_t i = 0; i < sa; ++i) {
    for (std::size_t j = 0; j < sb; ++j) {
      if (policy == AnchorPolicy::Character) {
        const auto blk = a.block_of(i);
        if (blk != b.block_of(j)) continue;
        c.block.push_back(static_cast<int>(blk));
      } else {
        c.block.push_back(0);
      }
      c.states.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return c;
}

CompositeResult viterbi_composite(const CompositeHMM& comp, std::span<const int> obs_a,
                                  std::span<const int> obs_b, EndMode end) {
  if (obs_a.size() != obs_b.size()) throw Error("streams must have equal length");
  if (obs_a.empty()) throw Error("empty observation sequence");
  const DiscreteHMM& ma = comp.a.hmm;
  const DiscreteHMM& mb = comp.b.hmm;
  for (int o : obs_a)
    if (o < 0 || static_cast<std::size_t>(o) >= ma.symbols()) throw Error("stream A symbol out of range");
  for (int o : obs_b)
    if (o < 0 || static_cast<std::size_t>(o) >= mb.symbols()) throw Error("stream B symbol out of range");

  const double wa = comp.weights[0];
  const double wb = comp.weights[1];
  const std::size_t sa = ma.states();
  const std::size_t sb = mb.states();
  const std::size_t n = comp.states.size();
  const std::size_t t_len = obs_a.size();

  std::vector<int> index(sa * sb, -1);
  for (std::size_t p = 0; p < n; ++p)
    index[static_cast<std::size_t>(comp.states[p].first) * sb + static_cast<std::size_t>(comp.states[p].second)] =
        static_cast<int>(p);

  // Structurally possible predecessors of each component state, ascending.
  auto preds = [](const DiscreteHMM& m) {
    std::vector<std::vector<int>> pr(m.states());
    for (std::size_t i = 0; i < m.states(); ++i)
      for (std::size_t j = 0; j < m.states(); ++j)
        if (m.A(i, j) > 0.0) pr[j].push_back(static_cast<int>(i));
    return pr;
  };
  const auto pred_a = preds(ma);
  const auto pred_b = preds(mb);

  auto emit = [&](std::size_t p, std::size_t t) {
    const auto [i, j] = comp.states[p];
    return weighted_log(wa, safe_log(ma.B(static_cast<std::size_t>(i), static_cast<std::size_t>(obs_a[t])))) +
           weighted_log(wb, safe_log(mb.B(static_cast<std::size_t>(j), static_cast<std::size_t>(obs_b[t]))));
  };

  std::vector<double> delta(n, kNegInf);
  std::vector<double> next(n);
  std::vector<int> back(t_len * n, -1);
  for (std::size_t p = 0; p < n; ++p) {
    const auto [i, j] = comp.states[p];
    const double pa = ma.pi[static_cast<std::size_t>(i)];
    const double pb = mb.pi[static_cast<std::size_t>(j)];
    if (pa > 0.0 && pb > 0.0) delta[p] = weighted_log(wa, std::log(pa)) + weighted_log(wb, std::log(pb)) + emit(p, 0);
  }

  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t p = 0; p < n; ++p) {
      const auto [ja, jb] = comp.states[p];
      double best = kNegInf;
      int arg = -1;
      for (int ia : pred_a[static_cast<std::size_t>(ja)]) {
        const double la = weighted_log(wa, std::log(ma.A(static_cast<std::size_t>(ia), static_cast<std::size_t>(ja))));
        for (int ib : pred_b[static_cast<std::size_t>(jb)]) {
          const int q = index[static_cast<std::size_t>(ia) * sb + static_cast<std::size_t>(ib)];
          if (q < 0 || delta[static_cast<std::size_t>(q)] == kNegInf) continue;
          const double lb =
              weighted_log(wb, std::log(mb.A(static_cast<std::size_t>(ib), static_cast<std::size_t>(jb))));
          const double v = delta[static_cast<std::size_t>(q)] + (la + lb);
          if (beats_log(v, best)) {
            best = v;
            arg = q;
          }
        }
      }
      next[p] = arg < 0 ? kNegInf : best + emit(p, t);
      back[t * n + p] = arg;
    }
    delta.swap(next);
  }

  CompositeResult r;
  r.logprob = kNegInf;
  int last = -1;
  if (end == EndMode::Final) {
    const int q = index[(sa - 1) * sb + (sb - 1)];
    if (q >= 0 && ma.exit > 0.0 && mb.exit > 0.0 && delta[static_cast<std::size_t>(q)] != kNegInf) {
      last = q;
      r.logprob = delta[static_cast<std::size_t>(q)] +
                  (weighted_log(wa, std::log(ma.exit)) + weighted_log(wb, std::log(mb.exit)));
    }
  } else {
    for (std::size_t p = 0; p < n; ++p)
      if (beats_log(delta[p], r.logprob)) {
        r.logprob = delta[p];
        last = static_cast<int>(p);
      }
  }
  if (last < 0) return r;
  std::vector<int> seq(t_len);
  seq[t_len - 1] = last;
  for (std::size_t t = t_len - 1; t > 0; --t) seq[t - 1] = back[t * n + static_cast<std::size_t>(seq[t])];
  r.path.reserve(t_len);
  for (int p : seq) r.path.push_back(comp.states[static_cast<std::size_t>(p)]);
  return r;
}

}  // namespace mashq
