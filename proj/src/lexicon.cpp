#include "mashq/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "mashq/error.hpp"
#include "mashq/model_io.hpp"
#include "mashq/preprocess.hpp"
#include "mashq/rng.hpp"

namespace fs = std::filesystem;

namespace mashq {

namespace {

bool valid_label(const std::string& s) {
  if (s.empty() || s == "." || s == "..") return false;
  for (char c : s)
    if (c == '/' || c == '\\' || c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  return true;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

}  // namespace

// --- lexicon ----------------------------------------------------------------

Lexicon::Lexicon(std::map<std::string, std::vector<std::string>> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error("lexicon is empty");
  for (const auto& [word, spelling] : entries_) {
    if (!valid_label(word)) throw Error("invalid word label '" + word + "'");
    if (spelling.empty()) throw Error("word '" + word + "' has an empty spelling");
    for (const auto& c : spelling)
      if (!valid_label(c)) throw Error("word '" + word + "' has an invalid character label '" + c + "'");
  }
}

const std::vector<std::string>& Lexicon::spelling(const std::string& word) const {
  const auto it = entries_.find(word);
  if (it == entries_.end()) throw Error("word '" + word + "' is not in the lexicon");
  return it->second;
}

std::vector<std::string> Lexicon::alphabet() const {
  std::set<std::string> all;
  for (const auto& [word, spelling] : entries_) all.insert(spelling.begin(), spelling.end());
  return {all.begin(), all.end()};
}

Lexicon parse_lexicon(std::string_view text) {
  std::map<std::string, std::vector<std::string>> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error("lexicon line " + std::to_string(line_no) + ": expected word TAB spelling");
    const std::string word = line.substr(0, tab);
    std::istringstream sp(line.substr(tab + 1));
    std::vector<std::string> spelling;
    for (std::string c; sp >> c;) spelling.push_back(c);
    if (!entries.emplace(word, std::move(spelling)).second)
      throw Error("lexicon line " + std::to_string(line_no) + ": duplicate word '" + word + "'");
  }
  return Lexicon(std::move(entries));
}

std::string format_lexicon(const Lexicon& lexicon) {
  std::string out;
  for (const auto& [word, spelling] : lexicon.entries()) {
    out += word;
    out += '\t';
    for (std::size_t i = 0; i < spelling.size(); ++i) {
      if (i) out += ' ';
      out += spelling[i];
    }
    out += '\n';
  }
  return out;
}

Lexicon read_lexicon(const std::string& path) {
  try {
    return parse_lexicon(slurp(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

// --- recognition ------------------------------------------------------------

BinaryImage prepare_word(const BinaryImage& image, const Config& cfg) {
  const BinaryImage filtered = cfg.median ? median3x3(image) : image;
  const auto box = ink_bbox(filtered);
  if (!box) throw Error("blank word image");
  return crop(filtered, *box);
}

std::array<std::vector<int>, 2> observe(const Recognizer& rec, const BinaryImage& word_image) {
  const auto [sw, vh] = extract_streams(prepare_word(word_image, rec.config), rec.config.features);
  return {quantize_all(sw.vectors, rec.stream(StreamId::SW).codebook),
          quantize_all(vh.vectors, rec.stream(StreamId::VH2D).codebook)};
}

WordModel build_word_model(const Recognizer& rec, const std::string& word, StreamId stream) {
  const auto& spelling = rec.lexicon.spelling(word);
  const auto& chars = rec.stream(stream).chars;
  std::vector<DiscreteHMM> parts;
  parts.reserve(spelling.size());
  for (const auto& c : spelling) {
    const auto it = chars.find(c);
    if (it == chars.end())
      throw Error("character '" + c + "' has no " + std::string(stream_name(stream)) + " model");
    parts.push_back(it->second);
  }
  return concat(parts, spelling);
}

std::vector<Candidate> score_words(const Recognizer& rec, const BinaryImage& word_image) {
  const auto obs = observe(rec, word_image);
  std::vector<Candidate> out;
  out.reserve(rec.lexicon.size());
  for (const auto& [word, spelling] : rec.lexicon.entries()) {
    Candidate c;
    c.word = word;
    for (auto id : kStreams) {
      const auto k = static_cast<std::size_t>(id);
      c.stream_scores[k] = viterbi(build_word_model(rec, word, id).hmm, obs[k], EndMode::Final).logprob;
    }
    out.push_back(std::move(c));
  }
  return out;
}

RecognitionResult recognize(const Recognizer& rec, const BinaryImage& word_image, const StreamWeights& weights) {
  return {rank_words(score_words(rec, word_image), weights)};
}

RecognitionResult recognize(const Recognizer& rec, const BinaryImage& word_image) {
  return recognize(rec, word_image, rec.config.weights);
}

// --- training ---------------------------------------------------------------

namespace {

struct Sample {
  const std::vector<std::string>* spelling;
  std::vector<int> obs;
};

// Emission counts from an even split of frames over characters, then over
// each character's states.
std::map<std::string, HmmStats> uniform_segmentation(const std::vector<Sample>& samples,
                                                     const std::map<std::string, DiscreteHMM>& models) {
  std::map<std::string, HmmStats> stats;
  for (const auto& [label, m] : models) stats.emplace(label, HmmStats(m.states(), m.symbols()));
  for (const auto& s : samples) {
    const std::size_t t_len = s.obs.size();
    const std::size_t n_chars = s.spelling->size();
    for (std::size_t c = 0; c < n_chars; ++c) {
      const std::size_t c0 = c * t_len / n_chars;
      const std::size_t c1 = (c + 1) * t_len / n_chars;
      auto& st = stats.at((*s.spelling)[c]);
      const std::size_t n_states = st.pi.size();
      const std::size_t len = c1 - c0;
      for (std::size_t q = 0; q < n_states; ++q) {
        const std::size_t f0 = c0 + q * len / n_states;
        const std::size_t f1 = c0 + (q + 1) * len / n_states;
        for (std::size_t t = f0; t < f1; ++t) st.emit(q, static_cast<std::size_t>(s.obs[t])) += 1.0;
      }
    }
  }
  return stats;
}

// One pass of embedded Baum-Welch with tied character parameters; returns
// the corpus loglik under `models` and leaves the tied counts in `stats`.
double embedded_e_step(const std::vector<Sample>& samples, const std::map<std::string, DiscreteHMM>& models,
                       std::map<std::string, HmmStats>& stats) {
  for (auto& [label, st] : stats) st = HmmStats(models.at(label).states(), models.at(label).symbols());
  double total = 0.0;
  for (const auto& s : samples) {
    std::vector<DiscreteHMM> parts;
    for (const auto& c : *s.spelling) parts.push_back(models.at(c));
    const WordModel wm = concat(parts, *s.spelling);
    HmmStats ws(wm.hmm.states(), wm.hmm.symbols());
    total += accumulate_stats(wm.hmm, s.obs, EndMode::Final, ws);

    const std::size_t n_blocks = wm.anchors.size();
    for (std::size_t b = 0; b < n_blocks; ++b) {
      auto& st = stats.at(wm.labels[b]);
      const auto off = static_cast<std::size_t>(wm.anchors[b]);
      const std::size_t n = st.pi.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (b == 0) st.pi[i] += ws.pi[off + i];
        for (std::size_t j = 0; j < n; ++j) st.trans(i, j) += ws.trans(off + i, off + j);
        for (std::size_t o = 0; o < st.emit.cols(); ++o) st.emit(i, o) += ws.emit(off + i, o);
      }
      st.exit += b + 1 < n_blocks ? ws.trans(off + n - 1, off + n) : ws.exit;
    }
  }
  return total;
}

}  // namespace

Recognizer train(std::span<const LabeledImage> corpus, const Lexicon& lexicon, const Config& cfg,
                 TrainingTrace* trace) {
  cfg.validate();
  if (corpus.empty()) throw Error("training corpus is empty");
  for (const auto& s : corpus)
    if (!lexicon.contains(s.word)) throw Error("training word '" + s.word + "' is not in the lexicon");

  Recognizer rec;
  rec.config = cfg;
  rec.lexicon = lexicon;

  std::array<std::vector<std::vector<std::vector<double>>>, 2> feats;
  for (const auto& s : corpus) {
    auto [sw, vh] = extract_streams(prepare_word(s.image, cfg), cfg.features);
    feats[0].push_back(std::move(sw.vectors));
    feats[1].push_back(std::move(vh.vectors));
  }

  for (auto id : kStreams) {
    const auto k = static_cast<std::size_t>(id);
    std::vector<std::vector<double>> pool;
    for (const auto& seq : feats[k]) pool.insert(pool.end(), seq.begin(), seq.end());
    std::vector<std::vector<double>> distinct = pool;
    std::sort(distinct.begin(), distinct.end());
    const std::size_t n_distinct =
        static_cast<std::size_t>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
    const std::size_t n_symbols = std::min(cfg.codebook_size, n_distinct);

    StreamModels& sm = rec.streams[k];
    sm.codebook = kmeans(pool, n_symbols, mix_seed(cfg.seed, k), cfg.kmeans_iters);

    std::vector<Sample> samples;
    samples.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i)
      samples.push_back({&lexicon.spelling(corpus[i].word), quantize_all(feats[k][i], sm.codebook)});

    for (const auto& label : lexicon.alphabet())
      sm.chars.emplace(label, make_left_right(static_cast<std::size_t>(cfg.states_per_char), n_symbols,
                                              cfg.exit_init));
    const auto boot = uniform_segmentation(samples, sm.chars);
    for (auto& [label, m] : sm.chars) m = reestimate(m, boot.at(label), cfg.floor, EndMode::Final);

    // Samples with fewer frames than their word model can absorb have zero
    // likelihood under every model of this structure; leave them out.
    std::vector<Sample> usable;
    for (auto& s : samples) {
      std::vector<DiscreteHMM> parts;
      for (const auto& c : *s.spelling) parts.push_back(sm.chars.at(c));
      if (std::isfinite(loglik_forward(concat(parts, *s.spelling).hmm, s.obs, EndMode::Final)))
        usable.push_back(std::move(s));
    }
    if (trace) trace->skipped[k] = samples.size() - usable.size();
    if (usable.empty()) throw Error("no training sample is long enough for its word model");

    std::map<std::string, HmmStats> stats;
    for (const auto& [label, m] : sm.chars) stats.emplace(label, HmmStats(m.states(), m.symbols()));
    for (int iter = 0; iter < cfg.em_iters; ++iter) {
      const double ll = embedded_e_step(usable, sm.chars, stats);
      if (trace) trace->loglik[k].push_back(ll);
      for (auto& [label, m] : sm.chars) m = reestimate(m, stats.at(label), cfg.floor, EndMode::Final);
    }
    if (trace) trace->loglik[k].push_back(embedded_e_step(usable, sm.chars, stats));
  }
  return rec;
}

// --- bundle -----------------------------------------------------------------

void save_bundle(const Recognizer& rec, const std::string& dir) {
  fs::create_directories(dir);
  dump(format_config(rec.config), (fs::path(dir) / "config").string());
  dump(format_lexicon(rec.lexicon), (fs::path(dir) / "lexicon.tsv").string());
  for (auto id : kStreams) {
    const auto& sm = rec.stream(id);
    const fs::path sdir = fs::path(dir) / stream_name(id);
    fs::create_directories(sdir / "chars");
    ModelFile cb;
    cb.codebook = sm.codebook;
    write_model_file(cb, (sdir / "codebook.mshmm").string());
    for (const auto& [label, m] : sm.chars) {
      ModelFile f;
      f.hmm = m;
      f.anchors = {0};
      f.labels = {label};
      write_model_file(f, (sdir / "chars" / (label + ".mshmm")).string());
    }
  }
}

Recognizer load_bundle(const std::string& dir) {
  Recognizer rec;
  rec.config = read_config((fs::path(dir) / "config").string());
  rec.lexicon = read_lexicon((fs::path(dir) / "lexicon.tsv").string());
  for (auto id : kStreams) {
    auto& sm = rec.streams[static_cast<std::size_t>(id)];
    const fs::path sdir = fs::path(dir) / stream_name(id);
    auto cb = read_model_file((sdir / "codebook.mshmm").string());
    if (!cb.codebook) throw Error((sdir / "codebook.mshmm").string() + ": no codebook section");
    sm.codebook = std::move(*cb.codebook);
    for (const auto& label : rec.lexicon.alphabet()) {
      const auto path = (sdir / "chars" / (label + ".mshmm")).string();
      auto f = read_model_file(path);
      if (!f.hmm) throw Error(path + ": no hmm section");
      if (f.hmm->symbols() != sm.codebook.size()) throw Error(path + ": symbol count differs from the codebook");
      sm.chars.emplace(label, std::move(*f.hmm));
    }
  }
  return rec;
}

}  // namespace mashq
