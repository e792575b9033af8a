#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mashq/lexicon.hpp"
#include "mashq/raster.hpp"

namespace mashq {

// Character label -> prototype glyph. All prototypes share one height.
class GlyphSet {
 public:
  GlyphSet() = default;
  explicit GlyphSet(std::map<std::string, BinaryImage> glyphs);

  const BinaryImage& glyph(const std::string& label) const;
  bool contains(const std::string& label) const { return glyphs_.count(label) != 0; }
  const std::map<std::string, BinaryImage>& glyphs() const noexcept { return glyphs_; }
  int height() const;

 private:
  std::map<std::string, BinaryImage> glyphs_;
};

// Sixteen abstract connected glyphs on a shared baseline stroke. Several
// pairs differ only by a detached dot above or below.
GlyphSet builtin_glyphs();
// The 20-word benchmark vocabulary over the builtin glyphs.
Lexicon builtin_lexicon();

// Directory of `<label>.pbm` files.
GlyphSet read_glyph_dir(const std::string& dir);
void write_glyph_dir(const GlyphSet& glyphs, const std::string& dir);

inline constexpr int kWordMargin = 4;

// Glyphs laid out right to left (spelling[0] rightmost) on a shared baseline.
// gaps[i] is the blank run between glyph i and glyph i+1.
BinaryImage render_word(const GlyphSet& glyphs, std::span<const std::string> spelling, std::span<const int> gaps);

enum class Split { Train, Test };
const char* split_name(Split split);
Split parse_split(const std::string& name);

struct CorpusSample {
  std::string word;
  BinaryImage image;
  std::uint64_t seed = 0;  // the sample's own generator seed
};

struct Corpus {
  std::vector<CorpusSample> samples;
  Split split = Split::Train;
  std::uint64_t seed = 0;

  std::vector<LabeledImage> labeled() const;
};

struct CorpusSpec {
  int n_per_word = 10;
  double noise_p = 0.03;
  double skew_degrees = 5.0;
};

// Each sample: random gaps of 0..3 columns, rotation uniform in
// [-skew, +skew], then salt-and-pepper noise. Samples are ordered by lexicon
// word, then sequence number, and each derives its seed from (seed, split,
// index).
Corpus generate_corpus(const GlyphSet& glyphs, const Lexicon& lexicon, const CorpusSpec& spec,
                       std::uint64_t seed, Split split);

// Writes <dir>/<split>/<word>/<seq>.pbm for every corpus given and a single
// <dir>/manifest.tsv (path TAB label TAB seed) listing them all.
void write_corpus(std::span<const Corpus> corpora, const std::string& dir);
Corpus read_corpus(const std::string& dir, Split split);

struct EvalReport {
  // recognizer name -> accuracy in percent, in fixed row order
  std::vector<std::pair<std::string, double>> rows;
  std::size_t samples = 0;
  // (truth, decision) -> count, for the combined recognizer
  std::map<std::pair<std::string, std::string>, int> confusion;

  double rate(const std::string& name) const;
};

inline constexpr const char* kRowSW = "stream-SW";
inline constexpr const char* kRowVH2D = "stream-VH2D";
inline constexpr const char* kRowCombined = "combined";

// Rank-0 accuracy with weights (1,0), (0,1) and the configured fusion weights.
EvalReport evaluate(const Recognizer& rec, const Corpus& test);
EvalReport evaluate(const Recognizer& rec, std::span<const LabeledImage> test, const StreamWeights& fused);

// `recognizer\trate` header and one row per recognizer, one decimal.
std::string format_report(const EvalReport& report);
std::string format_confusion(const EvalReport& report);

// Best fusion weight for the first stream on {0, 0.1, ..., 1}; ties go to
// the value closest to 0.5, then the smaller one.
StreamWeights select_weights(const Recognizer& rec, std::span<const LabeledImage> validation);

}  // namespace mashq
