#include "mashq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mashq/error.hpp"
#include "mashq/rng.hpp"

namespace fs = std::filesystem;

namespace mashq {

// --- glyphs -----------------------------------------------------------------

GlyphSet::GlyphSet(std::map<std::string, BinaryImage> glyphs) : glyphs_(std::move(glyphs)) {
  if (glyphs_.empty()) throw Error("glyph set is empty");
  const int h = glyphs_.begin()->second.height();
  for (const auto& [label, img] : glyphs_) {
    if (img.height() != h) throw Error("glyph '" + label + "' differs in height");
    if (ink_count(img) == 0) throw Error("glyph '" + label + "' is blank");
  }
}

const BinaryImage& GlyphSet::glyph(const std::string& label) const {
  const auto it = glyphs_.find(label);
  if (it == glyphs_.end()) throw Error("no glyph for character '" + label + "'");
  return it->second;
}

int GlyphSet::height() const {
  if (glyphs_.empty()) throw Error("glyph set is empty");
  return glyphs_.begin()->second.height();
}

namespace {

constexpr int kGlyphHeight = 32;
constexpr int kBaseTop = 20;     // connecting stroke rows [20, 23)
constexpr int kBaseBottom = 23;

void fill_rect(BinaryImage& img, int x0, int y0, int x1, int y1) {
  for (int y = std::max(0, y0); y < std::min(img.height(), y1); ++y)
    for (int x = std::max(0, x0); x < std::min(img.width(), x1); ++x) img.set(x, y, true);
}

// Annulus centred at (cx, cy); `half` < 0 keeps rows above cy only, > 0 rows
// below only, 0 the full ring.
void ring(BinaryImage& img, double cx, double cy, double r_out, double r_in, int half) {
  for (int y = 0; y < img.height(); ++y) {
    if (half < 0 && y > cy) continue;
    if (half > 0 && y < cy) continue;
    for (int x = 0; x < img.width(); ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (d <= r_out && d >= r_in) img.set(x, y, true);
    }
  }
}

void thick_line(BinaryImage& img, double x0, double y0, double x1, double y1, double half_width) {
  const double len2 = (x1 - x0) * (x1 - x0) + (y1 - y0) * (y1 - y0);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double t = ((x - x0) * (x1 - x0) + (y - y0) * (y1 - y0)) / len2;
      t = std::clamp(t, 0.0, 1.0);
      const double d = std::hypot(x - (x0 + t * (x1 - x0)), y - (y0 + t * (y1 - y0)));
      if (d <= half_width) img.set(x, y, true);
    }
  }
}

void dot(BinaryImage& img, int x, int y) { fill_rect(img, x, y, x + 4, y + 4); }

BinaryImage base(int width) {
  BinaryImage g(width, kGlyphHeight);
  fill_rect(g, 0, kBaseTop, width, kBaseBottom);
  return g;
}

}  // namespace

GlyphSet builtin_glyphs() {
  std::map<std::string, BinaryImage> g;

  auto stem = base(16);  // tall upright
  fill_rect(stem, 6, 3, 9, kBaseBottom);
  g.emplace("g00", stem);

  auto bowl = base(18);  // open bowl under the baseline
  ring(bowl, 8.5, 22, 7, 4, +1);
  g.emplace("g01", bowl);
  dot(bowl, 8, 12);
  g.emplace("g02", bowl);

  auto tooth = base(16);  // short upright
  fill_rect(tooth, 6, 12, 9, kBaseBottom);
  g.emplace("g03", tooth);
  auto tooth_below = tooth;
  dot(tooth_below, 6, 26);
  g.emplace("g04", tooth_below);
  auto tooth_two = tooth;
  dot(tooth_two, 3, 6);
  dot(tooth_two, 9, 6);
  g.emplace("g05", tooth_two);

  auto loop = base(18);  // closed loop sitting on the baseline
  ring(loop, 8.5, 15, 6.5, 3.5, 0);
  g.emplace("g06", loop);
  dot(loop, 8, 3);
  g.emplace("g07", loop);

  auto flag = base(16);  // upright with a flag to the left
  fill_rect(flag, 10, 4, 13, kBaseBottom);
  fill_rect(flag, 2, 4, 13, 7);
  g.emplace("g08", flag);

  auto tail = base(16);  // descender on the right
  fill_rect(tail, 11, kBaseTop, 14, 31);
  g.emplace("g09", tail);
  dot(tail, 4, 13);
  g.emplace("g10", tail);

  auto teeth = base(20);  // two short uprights
  fill_rect(teeth, 3, 12, 6, kBaseBottom);
  fill_rect(teeth, 13, 12, 16, kBaseBottom);
  g.emplace("g11", teeth);
  dot(teeth, 8, 26);
  g.emplace("g12", teeth);

  auto slash = base(18);  // rising diagonal
  thick_line(slash, 3, 21, 14, 5, 1.5);
  g.emplace("g13", slash);

  auto hump = base(22);  // low arch
  ring(hump, 10.5, 20, 8, 5, -1);
  g.emplace("g14", hump);

  auto cross = base(16);  // upright with a crossbar
  fill_rect(cross, 7, 5, 10, kBaseBottom);
  fill_rect(cross, 2, 10, 15, 13);
  g.emplace("g15", cross);

  return GlyphSet(std::move(g));
}

Lexicon builtin_lexicon() {
  const std::vector<std::pair<std::string, std::string>> words = {
      {"w00", "g00 g01"},         {"w01", "g03 g01"},         {"w02", "g03 g06 g09"},     {"w03", "g04 g06 g09"},
      {"w04", "g05 g07 g10"},     {"w05", "g11 g00 g13"},     {"w06", "g11 g03 g13"},     {"w07", "g14 g03 g08"},
      {"w08", "g14 g04 g08"},     {"w09", "g15 g06 g01"},     {"w10", "g15 g07 g02"},     {"w11", "g08 g11 g14 g03"},
      {"w12", "g08 g12 g14 g03"}, {"w13", "g13 g09 g00"},     {"w14", "g13 g10 g00"},     {"w15", "g02 g15 g11"},
      {"w16", "g01 g15 g12"},     {"w17", "g06 g00 g09"},     {"w18", "g06 g03 g09"},     {"w19", "g09 g14 g05"},
  };

  std::map<std::string, std::vector<std::string>> entries;
  for (const auto& [word, spelling] : words) {
    std::istringstream in(spelling);
    std::vector<std::string> chars;
    for (std::string c; in >> c;) chars.push_back(c);
    entries.emplace(word, std::move(chars));
  }
  return Lexicon(std::move(entries));
}

GlyphSet read_glyph_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error("glyph directory " + dir + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pbm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::map<std::string, BinaryImage> g;
  for (const auto& p : files) g.emplace(p.stem().string(), load_binary_file(p.string()));
  return GlyphSet(std::move(g));
}

void write_glyph_dir(const GlyphSet& glyphs, const std::string& dir) {
  fs::create_directories(dir);
  for (const auto& [label, img] : glyphs.glyphs()) save_pnm_file(img, (fs::path(dir) / (label + ".pbm")).string());
}

BinaryImage render_word(const GlyphSet& glyphs, std::span<const std::string> spelling, std::span<const int> gaps) {
  if (spelling.empty()) throw Error("empty spelling");
  if (gaps.size() + 1 != spelling.size()) throw Error("one gap per adjacent glyph pair is required");
  int width = 2 * kWordMargin;
  for (const auto& c : spelling) width += glyphs.glyph(c).width();
  for (int gap : gaps) width += gap;
  BinaryImage img(width, glyphs.height() + 2 * kWordMargin);
  int right = width - kWordMargin;
  for (std::size_t i = 0; i < spelling.size(); ++i) {
    const auto& g = glyphs.glyph(spelling[i]);
    right -= g.width();
    blit_or(img, g, right, kWordMargin);
    if (i < gaps.size()) right -= gaps[i];
  }
  return img;
}

// --- corpus -----------------------------------------------------------------

const char* split_name(Split split) { return split == Split::Train ? "train" : "test"; }

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "test") return Split::Test;
  throw Error("unknown split '" + name + "'");
}

std::vector<LabeledImage> Corpus::labeled() const {
  std::vector<LabeledImage> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.word, s.image});
  return out;
}

Corpus generate_corpus(const GlyphSet& glyphs, const Lexicon& lexicon, const CorpusSpec& spec, std::uint64_t seed,
                       Split split) {
  if (spec.n_per_word < 1) throw Error("need at least one sample per word");
  if (!(spec.noise_p >= 0.0 && spec.noise_p <= 0.5)) throw Error("noise probability must lie in [0, 0.5]");
  if (!(std::abs(spec.skew_degrees) <= 20.0)) throw Error("skew must lie within 20 degrees");
  for (const auto& [word, spelling] : lexicon.entries())
    for (const auto& c : spelling)
      if (!glyphs.contains(c)) throw Error("word '" + word + "' uses unregistered glyph '" + c + "'");

  Corpus corpus;
  corpus.split = split;
  corpus.seed = seed;
  const std::uint64_t split_seed = mix_seed(seed, split == Split::Train ? 0x7472u : 0x7465u);
  std::uint64_t index = 0;
  for (const auto& [word, spelling] : lexicon.entries()) {
    for (int n = 0; n < spec.n_per_word; ++n, ++index) {
      const std::uint64_t sample_seed = mix_seed(split_seed, index);
      Rng rng(sample_seed);
      std::vector<int> gaps(spelling.size() - 1);
      for (auto& g : gaps) g = rng.range(0, 3);
      BinaryImage img = render_word(glyphs, spelling, gaps);
      const double skew = spec.skew_degrees == 0.0 ? 0.0 : rng.uniform(-spec.skew_degrees, spec.skew_degrees);
      if (skew != 0.0) img = rotate(img, skew);
      const std::uint64_t noise_seed = rng.next();
      if (spec.noise_p > 0.0) img = add_salt_pepper(img, spec.noise_p, noise_seed);
      corpus.samples.push_back({word, std::move(img), sample_seed});
    }
  }
  return corpus;
}

void write_corpus(std::span<const Corpus> corpora, const std::string& dir) {
  fs::create_directories(dir);
  std::string manifest;
  for (const auto& corpus : corpora) {
    std::map<std::string, int> seq;
    for (const auto& s : corpus.samples) {
      const int n = seq[s.word]++;
      char name[16];
      std::snprintf(name, sizeof name, "%04d.pbm", n);
      const fs::path rel = fs::path(split_name(corpus.split)) / s.word / name;
      fs::create_directories(fs::path(dir) / rel.parent_path());
      save_pnm_file(s.image, (fs::path(dir) / rel).string());
      manifest += rel.generic_string() + "\t" + s.word + "\t" + std::to_string(s.seed) + "\n";
    }
  }
  std::ofstream out(fs::path(dir) / "manifest.tsv", std::ios::binary);
  if (!out) throw Error("cannot write manifest in " + dir);
  out << manifest;
}

Corpus read_corpus(const std::string& dir, Split split) {
  const auto path = fs::path(dir) / "manifest.tsv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  Corpus corpus;
  corpus.split = split;
  const std::string prefix = std::string(split_name(split)) + "/";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string rel, word, seed;
    if (!std::getline(fields, rel, '\t') || !std::getline(fields, word, '\t') || !std::getline(fields, seed))
      throw Error(path.string() + " line " + std::to_string(line_no) + ": expected path TAB label TAB seed");
    if (rel.rfind(prefix, 0) != 0) continue;
    corpus.samples.push_back({word, load_binary_file((fs::path(dir) / rel).string()), std::stoull(seed)});
  }
  if (corpus.samples.empty()) throw Error(dir + ": no samples in split '" + split_name(split) + "'");
  return corpus;
}

// --- evaluation -------------------------------------------------------------

double EvalReport::rate(const std::string& name) const {
  for (const auto& [n, r] : rows)
    if (n == name) return r;
  throw Error("report has no row '" + name + "'");
}

EvalReport evaluate(const Recognizer& rec, std::span<const LabeledImage> test, const StreamWeights& fused) {
  if (test.empty()) throw Error("test corpus is empty");
  const std::array<StreamWeights, 3> settings{StreamWeights(1.0, 0.0), StreamWeights(0.0, 1.0), fused};
  std::array<std::size_t, 3> correct{};
  EvalReport report;
  for (const auto& sample : test) {
    const auto scores = score_words(rec, sample.image);
    for (std::size_t r = 0; r < settings.size(); ++r) {
      const auto ranked = rank_words(scores, settings[r]);
      if (ranked.front().word == sample.word) ++correct[r];
      if (r == 2) ++report.confusion[{sample.word, ranked.front().word}];
    }
  }
  report.samples = test.size();
  const char* names[3] = {kRowSW, kRowVH2D, kRowCombined};
  for (std::size_t r = 0; r < 3; ++r)
    report.rows.emplace_back(names[r], 100.0 * static_cast<double>(correct[r]) / static_cast<double>(test.size()));
  return report;
}

EvalReport evaluate(const Recognizer& rec, const Corpus& test) {
  return evaluate(rec, test.labeled(), rec.config.weights);
}

std::string format_report(const EvalReport& report) {
  std::string out = "recognizer\trate\n";
  char buf[32];
  for (const auto& [name, rate] : report.rows) {
    std::snprintf(buf, sizeof buf, "%.1f", rate);
    out += name + "\t" + buf + "\n";
  }
  return out;
}

std::string format_confusion(const EvalReport& report) {
  std::string out = "truth\tdecision\tcount\n";
  for (const auto& [key, n] : report.confusion) out += key.first + "\t" + key.second + "\t" + std::to_string(n) + "\n";
  return out;
}

StreamWeights select_weights(const Recognizer& rec, std::span<const LabeledImage> validation) {
  if (validation.empty()) throw Error("validation set is empty");
  std::vector<std::vector<Candidate>> scores;
  scores.reserve(validation.size());
  for (const auto& s : validation) scores.push_back(score_words(rec, s.image));

  int best_step = 5;
  int best_correct = -1;
  for (int step : {5, 4, 6, 3, 7, 2, 8, 1, 9, 0, 10}) {
    const double w = step / 10.0;
    const StreamWeights weights(w, 1.0 - w);
    int correct = 0;
    for (std::size_t i = 0; i < validation.size(); ++i)
      if (rank_words(scores[i], weights).front().word == validation[i].word) ++correct;
    if (correct > best_correct) {
      best_correct = correct;
      best_step = step;
    }
  }
  const double w = best_step / 10.0;
  return StreamWeights(w, 1.0 - w);
}

}  // namespace mashq
