#pragma once

// Reference implementations used only by the tests. They favour the most
// literal reading of each definition over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mashq/harness.hpp"
#include "mashq/hmm.hpp"
#include "mashq/multistream.hpp"
#include "mashq/raster.hpp"
#include "mashq/rng.hpp"

namespace oracle {

using namespace mashq;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double lg(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

inline BinaryImage random_binary(int w, int h, double density, Rng& rng) {
  BinaryImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, rng.bernoulli(density));
  return img;
}

inline GrayImage random_gray(int w, int h, Rng& rng) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, static_cast<std::uint8_t>(rng.below(256)));
  return img;
}

inline std::vector<int> row_counts(const BinaryImage& img) {
  std::vector<int> out;
  for (int y = 0; y < img.height(); ++y) {
    int n = 0;
    for (int x = 0; x < img.width(); ++x)
      if (img.at(x, y)) ++n;
    out.push_back(n);
  }
  return out;
}

inline std::vector<int> column_counts(const BinaryImage& img) {
  std::vector<int> out;
  for (int x = 0; x < img.width(); ++x) {
    int n = 0;
    for (int y = 0; y < img.height(); ++y)
      if (img.at(x, y)) ++n;
    out.push_back(n);
  }
  return out;
}

// Tries every threshold and keeps the first one with the largest
// between-class variance of the classes {v < t} and {v >= t}.
inline int otsu(const GrayImage& img) {
  const auto px = img.samples();
  int best_t = 0;
  double best = 0.0;
  for (int t = 1; t <= 255; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (auto v : px) {
      if (v < t) {
        n0 += 1;
        s0 += v;
      } else {
        n1 += 1;
        s1 += v;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double n = n0 + n1;
    const double var = (n0 / n) * (n1 / n) * (s0 / n0 - s1 / n1) * (s0 / n0 - s1 / n1);
    if (var > best) {
      best = var;
      best_t = t;
    }
  }
  return best_t;
}

// Sorts the nine replicated neighbours and takes the middle one.
inline BinaryImage median(const BinaryImage& img) {
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      std::vector<int> v;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = std::clamp(x + dx, 0, img.width() - 1);
          const int yy = std::clamp(y + dy, 0, img.height() - 1);
          v.push_back(img.at(xx, yy));
        }
      std::sort(v.begin(), v.end());
      out.set(x, y, v[4] != 0);
    }
  }
  return out;
}

struct Vh2d {
  std::vector<int> pv, ph, pd1, pd2;
};

// Literal constraint sums with 1-based row l and column k.
inline Vh2d vh2d(const BinaryImage& patch) {
  const int m = patch.width();
  Vh2d r;
  for (int k = 1; k <= m; ++k) {
    int s = 0;
    for (int l = 1; l <= m; ++l) s += patch.at(k - 1, l - 1);
    r.pv.push_back(s);
  }
  for (int l = 1; l <= m; ++l) {
    int s = 0;
    for (int k = 1; k <= m; ++k) s += patch.at(k - 1, l - 1);
    r.ph.push_back(s);
  }
  for (int idx = 1; idx <= 2 * m - 1; ++idx) {
    int s1 = 0, s2 = 0;
    for (int l = 1; l <= m; ++l)
      for (int k = 1; k <= m; ++k) {
        if (l == k + m - idx) s1 += patch.at(k - 1, l - 1);
        if (k == idx - l + 1) s2 += patch.at(k - 1, l - 1);
      }
    r.pd1.push_back(s1);
    r.pd2.push_back(s2);
  }
  return r;
}

// --- HMM path enumeration ---------------------------------------------------

struct Enumerated {
  double loglik = kNegInf;  // log of the summed path probabilities
  double best = kNegInf;    // best single-path log score
  std::vector<int> path;    // best path, tie-broken as documented
};

inline double path_score(const DiscreteHMM& m, const std::vector<int>& path, std::span<const int> obs,
                         EndMode end) {
  const std::size_t s = m.states();
  if (end == EndMode::Final && static_cast<std::size_t>(path.back()) != s - 1) return kNegInf;
  double v = lg(m.pi[path[0]]) + lg(m.B(path[0], obs[0]));
  for (std::size_t t = 1; t < obs.size(); ++t) v = v + lg(m.A(path[t - 1], path[t])) + lg(m.B(path[t], obs[t]));
  if (end == EndMode::Final) v += lg(m.exit);
  return v;
}

inline double path_prob(const DiscreteHMM& m, const std::vector<int>& path, std::span<const int> obs,
                        EndMode end) {
  const std::size_t s = m.states();
  if (end == EndMode::Final && static_cast<std::size_t>(path.back()) != s - 1) return 0.0;
  double p = m.pi[path[0]] * m.B(path[0], obs[0]);
  for (std::size_t t = 1; t < obs.size(); ++t) p *= m.A(path[t - 1], path[t]) * m.B(path[t], obs[t]);
  if (end == EndMode::Final) p *= m.exit;
  return p;
}

// Paths whose score is within `tie` of the best are treated as tied; among
// them the one that is smallest when read from the last frame backwards wins
// (smallest final state, then smallest predecessor at each step).
inline Enumerated enumerate(const DiscreteHMM& m, std::span<const int> obs, EndMode end, double tie = 1e-12) {
  const std::size_t s = m.states();
  const std::size_t t_len = obs.size();
  std::vector<int> path(t_len, 0);
  std::vector<std::pair<double, std::vector<int>>> all;
  double total = 0.0;
  for (;;) {
    total += path_prob(m, path, obs, end);
    all.emplace_back(path_score(m, path, obs, end), path);
    std::size_t d = 0;
    while (d < t_len && static_cast<std::size_t>(++path[d]) == s) path[d++] = 0;
    if (d == t_len) break;
  }
  Enumerated r;
  r.loglik = total > 0.0 ? std::log(total) : kNegInf;
  for (const auto& [v, p] : all) r.best = std::max(r.best, v);
  if (r.best == kNegInf) return r;
  bool have = false;
  for (const auto& [v, p] : all) {
    if (v < r.best - tie) continue;
    const bool smaller = !have || std::lexicographical_compare(p.rbegin(), p.rend(), r.path.rbegin(), r.path.rend());
    if (smaller) {
      r.path = p;
      have = true;
    }
  }
  return r;
}

inline std::vector<double> random_row(Rng& rng, std::size_t n, bool coarse) {
  std::vector<double> row(n);
  double sum = 0.0;
  for (auto& v : row) {
    v = coarse ? static_cast<double>(rng.range(0, 2)) : rng.uniform(0.05, 1.0);
    sum += v;
  }
  if (sum == 0.0) {
    row[rng.below(n)] = 1.0;
    sum = 1.0;
  }
  for (auto& v : row) v /= sum;
  return row;
}

// Arbitrary (not necessarily left-right) model. Coarse models draw weights
// from {0, 1, 2}, which produces exact ties and structural zeros.
inline DiscreteHMM random_hmm(Rng& rng, std::size_t s, std::size_t k, bool coarse) {
  DiscreteHMM m;
  m.pi = random_row(rng, s, coarse);
  m.A = Matrix(s, s);
  m.B = Matrix(s, k);
  m.exit = coarse ? 0.5 : rng.uniform(0.05, 0.6);
  for (std::size_t i = 0; i < s; ++i) {
    auto a = random_row(rng, s, coarse);
    const double mass = i + 1 == s ? 1.0 - m.exit : 1.0;
    for (std::size_t j = 0; j < s; ++j) m.A(i, j) = a[j] * mass;
    auto b = random_row(rng, k, coarse);
    for (std::size_t o = 0; o < k; ++o) m.B(i, o) = b[o];
  }
  return m;
}

// Left-right model with random band weights and emissions.
inline DiscreteHMM random_left_right(Rng& rng, std::size_t s, std::size_t k, double exit) {
  DiscreteHMM m = make_left_right(s, k, exit);
  for (std::size_t i = 0; i < s; ++i) {
    const double mass = i + 1 == s ? 1.0 - exit : 1.0;
    const std::size_t n = std::min<std::size_t>(3, s - i);
    auto a = random_row(rng, n, false);
    for (std::size_t d = 0; d < n; ++d) m.A(i, i + d) = a[d] * mass;
    auto b = random_row(rng, k, false);
    for (std::size_t o = 0; o < k; ++o) m.B(i, o) = b[o];
  }
  return m;
}

inline std::vector<int> random_obs(Rng& rng, std::size_t t_len, std::size_t k) {
  std::vector<int> obs(t_len);
  for (auto& o : obs) o = static_cast<int>(rng.below(k));
  return obs;
}

// Samples a sequence from the model (Any mode: stops after t_len frames).
inline std::vector<int> sample_hmm(const DiscreteHMM& m, std::size_t t_len, Rng& rng) {
  auto draw = [&rng](std::span<const double> p) {
    double u = rng.uniform();
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (u < p[i]) return i;
      u -= p[i];
    }
    return p.size() - 1;
  };
  std::vector<int> obs;
  std::size_t s = draw(m.pi);
  for (std::size_t t = 0; t < t_len; ++t) {
    obs.push_back(static_cast<int>(draw(m.B.row(s))));
    std::vector<double> row(m.A.row(s).begin(), m.A.row(s).end());
    double sum = 0.0;
    for (double v : row) sum += v;
    for (auto& v : row) v /= sum;
    s = draw(row);
  }
  return obs;
}

// --- composite decoding -----------------------------------------------------

inline double wlog(double w, double lp) { return w == 0.0 ? 0.0 : w * lp; }

// Best weighted pair-path score by enumerating every pair of component paths.
// Under the Character policy both components must sit in the same character
// block on every frame.
inline double composite_best(const WordModel& a, const WordModel& b, const StreamWeights& w, AnchorPolicy policy,
                             std::span<const int> oa, std::span<const int> ob, EndMode end) {
  const std::size_t t_len = oa.size();
  auto paths = [t_len](std::size_t s) {
    std::vector<std::vector<int>> out;
    std::vector<int> p(t_len, 0);
    for (;;) {
      out.push_back(p);
      std::size_t d = 0;
      while (d < t_len && static_cast<std::size_t>(++p[d]) == s) p[d++] = 0;
      if (d == t_len) break;
    }
    return out;
  };
  const auto pa = paths(a.hmm.states());
  const auto pb = paths(b.hmm.states());
  // Structural feasibility ignores emissions: a zero-weight stream still has
  // to follow possible transitions.
  auto feasible = [t_len, end](const DiscreteHMM& m, const std::vector<int>& p) {
    if (!(m.pi[p[0]] > 0.0)) return false;
    for (std::size_t t = 1; t < t_len; ++t)
      if (!(m.A(p[t - 1], p[t]) > 0.0)) return false;
    if (end == EndMode::Final)
      return static_cast<std::size_t>(p.back()) == m.states() - 1 && m.exit > 0.0;
    return true;
  };
  std::vector<double> sa, sb;
  for (const auto& p : pa) sa.push_back(feasible(a.hmm, p) ? path_score(a.hmm, p, oa, end) : std::nan(""));
  for (const auto& p : pb) sb.push_back(feasible(b.hmm, p) ? path_score(b.hmm, p, ob, end) : std::nan(""));
  double best = kNegInf;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (std::isnan(sa[i])) continue;
    for (std::size_t j = 0; j < pb.size(); ++j) {
      if (std::isnan(sb[j])) continue;
      if (policy == AnchorPolicy::Character) {
        bool ok = true;
        for (std::size_t t = 0; t < t_len && ok; ++t)
          ok = a.block_of(static_cast<std::size_t>(pa[i][t])) == b.block_of(static_cast<std::size_t>(pb[j][t]));
        if (!ok) continue;
      }
      best = std::max(best, wlog(w[0], sa[i]) + wlog(w[1], sb[j]));
    }
  }
  return best;
}

// --- synthetic pages --------------------------------------------------------

struct Page {
  BinaryImage image;
  std::vector<std::pair<int, int>> lines;  // [top, bottom) of the ink of each line
};

// Rows of rendered builtin words, separated by blank bands.
// Dotted glyphs put ink rows above or below the body separated by blank rows.
inline bool has_dots(const std::vector<std::string>& spelling) {
  for (const auto& c : spelling)
    if (c == "g02" || c == "g04" || c == "g05" || c == "g07" || c == "g10" || c == "g12") return true;
  return false;
}

inline Page text_page(int n_lines, std::uint64_t seed, bool dots = true) {
  const auto glyphs = builtin_glyphs();
  const auto lex = builtin_lexicon();
  std::vector<std::string> words;
  for (const auto& [w, sp] : lex.entries())
    if (dots || !has_dots(sp)) words.push_back(w);
  Rng rng(seed);
  const int width = 360;
  const int line_h = glyphs.height() + 2 * kWordMargin;
  const int lead = 14;
  Page page{BinaryImage(width, 20 + n_lines * (line_h + lead)), {}};
  for (int l = 0; l < n_lines; ++l) {
    const int top = 10 + l * (line_h + lead);
    int right = width - 10;
    int ink_top = page.image.height(), ink_bottom = 0;
    for (;;) {
      const auto& sp = lex.spelling(words[rng.below(words.size())]);
      std::vector<int> gaps(sp.size() - 1, 1);
      const auto img = render_word(glyphs, sp, gaps);
      if (right - img.width() < 10) break;
      blit_or(page.image, img, right - img.width(), top);
      const auto box = ink_bbox(img);
      ink_top = std::min(ink_top, top + box->y0);
      ink_bottom = std::max(ink_bottom, top + box->y1);
      right -= img.width() + 10;
    }
    page.lines.emplace_back(ink_top, ink_bottom);
  }
  return page;
}

}  // namespace oracle
