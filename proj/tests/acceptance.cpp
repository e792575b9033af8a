// Acceptance gate. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "mashq/harness.hpp"
#include "mashq/multistream.hpp"
#include "mashq/preprocess.hpp"
#include "oracles.hpp"

using namespace mashq;
namespace fs = std::filesystem;

namespace {

constexpr double kLogTol = 1e-9;       // criteria 1 and 6
constexpr double kEmSlack = 1e-8;      // criterion 2
constexpr double kSkewTol = 1.0;       // criterion 5, degrees
constexpr double kPageSeconds = 5.0;   // criterion 5
constexpr double kDecodeSeconds = 10;  // criterion 1
constexpr double kBenchSeconds = 300;  // criterion 7
constexpr double kMinStream = 70.0;    // criterion 7a
constexpr double kFusedSlack = 2.0;    // criterion 7b
constexpr int kMinWins = 6;            // criterion 7b

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

bool close(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1 -------------------------------------------------------------------------

Outcome decoder_correctness() {
  Outcome o;
  Rng rng(101);
  const auto t0 = Clock::now();
  int paths_checked = 0;
  for (int i = 0; i < 200; ++i) {
    const auto s = static_cast<std::size_t>(rng.range(1, 5));
    const auto k = static_cast<std::size_t>(rng.range(1, 6));
    const auto t_len = static_cast<std::size_t>(rng.range(1, 6));
    const auto m = i % 4 == 3 ? oracle::random_left_right(rng, s, k, rng.uniform(0.05, 0.6))
                              : oracle::random_hmm(rng, s, k, i % 2 == 0);
    const auto obs = oracle::random_obs(rng, t_len, k);
    for (auto end : {EndMode::Any, EndMode::Final}) {
      const auto e = oracle::enumerate(m, obs, end);
      const auto v = viterbi(m, obs, end);
      const double f = loglik_forward(m, obs, end);
      if (!close(f, e.loglik, kLogTol)) o.fail(fmt("model %.0f: forward off by %g", i, f - e.loglik));
      if (!close(v.logprob, e.best, kLogTol)) o.fail(fmt("model %.0f: viterbi off by %g", i, v.logprob - e.best));
      if (std::isfinite(e.best)) {
        ++paths_checked;
        if (v.path != e.path) o.fail(fmt("model %.0f: viterbi path differs", i));
      }
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= kDecodeSeconds) o.fail(fmt("took %.1f s", secs));
  if (o.pass) o.detail = fmt("200 models, %.0f finite paths compared, %.2f s", paths_checked, secs);
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome em_monotonicity() {
  Outcome o;
  Rng rng(202);
  double worst = 0.0;
  for (int run = 0; run < 20; ++run) {
    const auto s = static_cast<std::size_t>(rng.range(2, 5));
    const auto k = static_cast<std::size_t>(rng.range(2, 6));
    const auto truth = oracle::random_left_right(rng, s, k, rng.uniform(0.1, 0.5));
    std::vector<std::vector<int>> seqs;
    for (int n = 0; n < 10; ++n) seqs.push_back(oracle::sample_hmm(truth, static_cast<std::size_t>(rng.range(s, 15)), rng));
    const EndMode end = run % 2 ? EndMode::Final : EndMode::Any;
    BaumWelchConfig cfg;
    cfg.end = end;
    cfg.max_iter = 25;
    cfg.tol = -1.0;
    double prev = -INFINITY;
    cfg.on_iteration = [&](int it, const DiscreteHMM& m, double ll) {
      try {
        check_stochastic(m, 1e-12);
      } catch (const std::exception& e) {
        o.fail(fmt("run %.0f iteration %.0f: ", run, it) + e.what());
      }
      if (!is_left_right(m)) o.fail(fmt("run %.0f iteration %.0f: band structure lost", run, it));
      if (std::isfinite(prev) && ll < prev - kEmSlack) o.fail(fmt("run %.0f iteration %.0f: loglik fell by %g", run, it, prev - ll));
      if (std::isfinite(prev)) worst = std::min(worst, ll - prev);
      prev = ll;
    };
    baum_welch(make_left_right(s, k, 0.3), seqs, cfg);
  }
  if (o.pass) o.detail = fmt("20 runs x 25 iterations, largest decrease %g", 0.0 - worst);
  return o;
}

// 3 -------------------------------------------------------------------------

Outcome vh2d_conservation() {
  Outcome o;
  Rng rng(303);
  const int sides[3] = {4, 8, 16};
  for (int i = 0; i < 500; ++i) {
    const int m = sides[i % 3];
    const auto patch = oracle::random_binary(m, m, rng.uniform(), rng);
    const auto p = vh2d(patch);
    const auto want = oracle::vh2d(patch);
    const long ink = static_cast<long>(ink_count(patch));
    auto sum = [](const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0L); };
    if (sum(p.vertical) != ink || sum(p.horizontal) != ink || sum(p.diag45) != ink || sum(p.diag135) != ink)
      o.fail(fmt("patch %.0f: sums differ from ink count %.0f", i, static_cast<double>(ink)));
    if (p.vertical != want.pv || p.horizontal != want.ph || p.diag45 != want.pd1 || p.diag135 != want.pd2)
      o.fail(fmt("patch %.0f: projections differ from the loop oracle", i));
  }
  if (o.pass) o.detail = "500 patches, M in {4, 8, 16}";
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome feature_invariants() {
  Outcome o;
  Rng rng(404);
  for (int i = 0; i < 500; ++i) {
    const int n = 8 * rng.range(1, 4);
    const int h = rng.range(1, 48);
    const auto patch = oracle::random_binary(n, h, rng.uniform(), rng);
    const std::optional<double> prev = rng.bernoulli(0.5) ? std::optional<double>(rng.uniform()) : std::nullopt;
    const auto f = sw_features(Frame{patch, n}, prev);
    if (f[0] + f[1] != 1.0) o.fail(fmt("frame %.0f: F1 + F2 = %.17g", i, f[0] + f[1]));
    double bands = 0.0;
    for (int b = 4; b < 12; ++b) bands += f[static_cast<std::size_t>(b)];
    if (bands / 8.0 != f[0]) o.fail(fmt("frame %.0f: band mean %.17g vs F1 %.17g", i, bands / 8.0, f[0]));
    for (std::size_t d = 0; d < kSwDims; ++d) {
      const double lo = d == 3 ? -1.0 : 0.0;
      if (!(f[d] >= lo && f[d] <= 1.0)) o.fail(fmt("frame %.0f: F%.0f = %g out of range", i, d + 1.0, f[d]));
    }
  }
  if (o.pass) o.detail = "500 frames";
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome skew_recovery() {
  Outcome o;
  const auto page = oracle::text_page(3, 505).image;
  double worst_est = 0.0, worst_res = 0.0, slowest = 0.0;
  for (double theta : {-18.0, -10.0, -5.0, 0.0, 5.0, 10.0, 18.0}) {
    const auto rotated = rotate(page, theta);
    const auto t0 = Clock::now();
    const auto est = estimate_skew_hough(rotated);
    const auto fixed = deskew(rotated, est);
    const double secs = seconds_since(t0);
    const double residual = estimate_skew_hough(fixed).angle;
    worst_est = std::max(worst_est, std::abs(est.angle - theta));
    worst_res = std::max(worst_res, std::abs(residual));
    slowest = std::max(slowest, secs);
    if (std::abs(est.angle - theta) > kSkewTol) o.fail(fmt("theta %g estimated as %g", theta, est.angle));
    if (std::abs(residual) > kSkewTol) o.fail(fmt("theta %g leaves residual %g", theta, residual));
    if (secs >= kPageSeconds) o.fail(fmt("theta %g took %.1f s", theta, secs));
  }
  if (o.pass) o.detail = fmt("max error %.2f deg, max residual %.2f deg, slowest page %.2f s", worst_est, worst_res, slowest);
  return o;
}

// 6 -------------------------------------------------------------------------

WordModel random_word(Rng& rng, const std::vector<std::string>& labels, std::size_t states, std::size_t k) {
  std::vector<DiscreteHMM> parts;
  for (std::size_t i = 0; i < labels.size(); ++i)
    parts.push_back(oracle::random_left_right(rng, states, k, rng.uniform(0.1, 0.5)));
  return concat(parts, labels);
}

Outcome fusion_decomposition() {
  Outcome o;
  Rng rng(606);
  const std::vector<std::vector<std::string>> spellings{{"x"}, {"x", "y"}, {"y", "x"}, {"x", "y", "z"}};
  for (int i = 0; i < 100; ++i) {
    const std::size_t t_len = static_cast<std::size_t>(rng.range(4, 10));
    const auto oa = oracle::random_obs(rng, t_len, 4);
    const auto ob = oracle::random_obs(rng, t_len, 5);
    const double w = rng.uniform(0.05, 0.95);
    const StreamWeights sw(w, 1.0 - w);

    // a handful of candidate words scored both ways
    std::vector<Candidate> table;
    std::vector<double> composite_first;
    for (std::size_t c = 0; c < spellings.size(); ++c) {
      const auto& sp = spellings[c];
      const auto a = random_word(rng, sp, 2, 4);
      const auto b = random_word(rng, sp, static_cast<std::size_t>(rng.range(1, 3)), 5);
      const auto va = viterbi(a.hmm, oa, EndMode::Final).logprob;
      const auto vb = viterbi(b.hmm, ob, EndMode::Final).logprob;
      const auto word = viterbi_composite(build_composite(a, b, sw, AnchorPolicy::Word), oa, ob, EndMode::Final);
      const auto chr = viterbi_composite(build_composite(a, b, sw, AnchorPolicy::Character), oa, ob, EndMode::Final);
      const double sep = w * va + (1.0 - w) * vb;
      if (!close(word.logprob, sep, kLogTol)) o.fail(fmt("instance %.0f: word composite off by %g", i, word.logprob - sep));
      if (chr.logprob > word.logprob + kLogTol) o.fail(fmt("instance %.0f: character score exceeds word score", i));
      const auto first =
          viterbi_composite(build_composite(a, b, StreamWeights(1.0, 0.0), AnchorPolicy::Word), oa, ob, EndMode::Final);
      if (!close(first.logprob, va, kLogTol)) o.fail(fmt("instance %.0f: (1,0) composite off by %g", i, first.logprob - va));
      composite_first.push_back(first.logprob);
      table.push_back({"c" + std::to_string(c), {va, vb}, 0.0});
    }

    auto by_first = table;
    std::stable_sort(by_first.begin(), by_first.end(), [](const Candidate& x, const Candidate& y) {
      return x.stream_scores[0] > y.stream_scores[0] || (x.stream_scores[0] == y.stream_scores[0] && x.word < y.word);
    });
    const auto ranked = rank_words(table, StreamWeights(1.0, 0.0));
    for (std::size_t r = 0; r < ranked.size(); ++r)
      if (ranked[r].word != by_first[r].word) o.fail(fmt("instance %.0f: (1,0) ranking differs at %.0f", i, r));
    const auto top = std::max_element(composite_first.begin(), composite_first.end()) - composite_first.begin();
    if (table[static_cast<std::size_t>(top)].stream_scores[0] != by_first.front().stream_scores[0])
      o.fail(fmt("instance %.0f: (1,0) composite argmax differs", i));
  }
  if (o.pass) o.detail = "100 instances, 4 candidate words each";
  return o;
}

// 7 and 8 -------------------------------------------------------------------

struct BenchRun {
  Recognizer rec;
  EvalReport report;
};

BenchRun bench_seed(int seed) {
  const auto glyphs = builtin_glyphs();
  const auto lex = builtin_lexicon();
  const auto s = static_cast<std::uint64_t>(seed);
  const auto train_set = generate_corpus(glyphs, lex, {10, 0.03, 5.0}, s, Split::Train);
  const auto test_set = generate_corpus(glyphs, lex, {5, 0.03, 5.0}, s, Split::Test);
  Config cfg;
  cfg.seed = s;
  BenchRun r;
  r.rec = train(train_set.labeled(), lex, cfg);
  r.report = evaluate(r.rec, test_set);
  return r;
}

Outcome benchmark() {
  Outcome o;
  const auto t0 = Clock::now();
  int wins = 0;
  std::string table;
  for (int seed = 1; seed <= 10; ++seed) {
    const auto r = bench_seed(seed);
    const double a = r.report.rate(kRowSW), b = r.report.rate(kRowVH2D), c = r.report.rate(kRowCombined);
    table += fmt(" [%g/%g/", a, b) + fmt("%g]", c);
    if (a < kMinStream || b < kMinStream) o.fail(fmt("seed %.0f: stream rates %.1f / %.1f", seed, a, b));
    if (c < std::max(a, b) - kFusedSlack) o.fail(fmt("seed %.0f: fused %.1f below best stream %.1f", seed, c, std::max(a, b)));
    if (c > a && c > b) ++wins;
  }
  const double secs = seconds_since(t0);
  if (wins < kMinWins) o.fail(fmt("fused beats both streams on %.0f of 10 seeds", wins));
  if (secs >= kBenchSeconds) o.fail(fmt("took %.0f s", secs));
  const std::string summary = fmt("wins %.0f/10, %.1f s; SW/VH2D/fused per seed:", wins, secs) + table;
  o.detail = o.pass ? summary : o.detail + "; " + summary;
  return o;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), dir).generic_string()] = s.str();
  }
  return files;
}

Outcome determinism() {
  Outcome o;
  const auto root = fs::temp_directory_path() / "mashq_acceptance";
  fs::remove_all(root);
  std::string reports[2];
  for (int rep = 0; rep < 2; ++rep) {
    const auto r = bench_seed(1);
    save_bundle(r.rec, (root / ("bundle" + std::to_string(rep))).string());
    reports[rep] = format_report(r.report) + format_confusion(r.report);
  }
  const auto a = tree(root / "bundle0");
  const auto b = tree(root / "bundle1");
  if (a.empty()) o.fail("bundle is empty");
  if (a != b) o.fail("bundles differ");
  if (reports[0] != reports[1]) o.fail("reports differ");
  if (o.pass) o.detail = fmt("%.0f bundle files and the report are byte-identical", static_cast<double>(a.size()));
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"decoder correctness", decoder_correctness},
      {"EM monotonicity", em_monotonicity},
      {"VH2D conservation", vh2d_conservation},
      {"feature invariants", feature_invariants},
      {"skew recovery", skew_recovery},
      {"fusion decomposition", fusion_decomposition},
      {"end-to-end benchmark", benchmark},
      {"determinism", determinism},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
