#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mashq/config.hpp"
#include "mashq/features.hpp"
#include "mashq/hmm.hpp"
#include "mashq/multistream.hpp"
#include "mashq/raster.hpp"

namespace mashq {

// Closed vocabulary: word label -> character labels in reading order
// (index 0 = first-read, rightmost character).
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::map<std::string, std::vector<std::string>> entries);

  const std::vector<std::string>& spelling(const std::string& word) const;
  bool contains(const std::string& word) const { return entries_.count(word) != 0; }
  const std::map<std::string, std::vector<std::string>>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  // Sorted, duplicate-free character labels used by any spelling.
  std::vector<std::string> alphabet() const;

  friend bool operator==(const Lexicon&, const Lexicon&) = default;

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

// `word TAB label label ...` per line.
Lexicon parse_lexicon(std::string_view text);
std::string format_lexicon(const Lexicon& lexicon);
Lexicon read_lexicon(const std::string& path);

struct LabeledImage {
  std::string word;
  BinaryImage image;
};

struct StreamModels {
  Codebook codebook;
  std::map<std::string, DiscreteHMM> chars;
  friend bool operator==(const StreamModels&, const StreamModels&) = default;
};

struct Recognizer {
  Config config;
  Lexicon lexicon;
  std::array<StreamModels, 2> streams;  // indexed by StreamId

  const StreamModels& stream(StreamId id) const { return streams[static_cast<std::size_t>(id)]; }
  friend bool operator==(const Recognizer&, const Recognizer&) = default;
};

// Median filter (when enabled) and crop to the ink box. Throws on blank input.
BinaryImage prepare_word(const BinaryImage& image, const Config& cfg);

// Feature streams of a prepared word, quantised with the recognizer's codebooks.
std::array<std::vector<int>, 2> observe(const Recognizer& rec, const BinaryImage& word_image);

WordModel build_word_model(const Recognizer& rec, const std::string& word, StreamId stream);

// Per-iteration corpus log-likelihood of embedded training, per stream.
// Entry i is the total after i re-estimations.
struct TrainingTrace {
  std::array<std::vector<double>, 2> loglik;
  std::array<std::size_t, 2> skipped{};  // samples too short for their word model
};

Recognizer train(std::span<const LabeledImage> corpus, const Lexicon& lexicon, const Config& cfg,
                 TrainingTrace* trace = nullptr);

struct RecognitionResult {
  std::vector<Candidate> ranked;
};

// Per-word per-stream Viterbi scores, unranked, in lexicon order.
std::vector<Candidate> score_words(const Recognizer& rec, const BinaryImage& word_image);

RecognitionResult recognize(const Recognizer& rec, const BinaryImage& word_image);
RecognitionResult recognize(const Recognizer& rec, const BinaryImage& word_image, const StreamWeights& weights);

// Bundle directory: config, lexicon.tsv, <stream>/codebook.mshmm and
// <stream>/chars/<label>.mshmm.
void save_bundle(const Recognizer& rec, const std::string& dir);
Recognizer load_bundle(const std::string& dir);

}  // namespace mashq
