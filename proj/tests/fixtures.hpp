#pragma once

#include <filesystem>
#include <string>

#include "mashq/harness.hpp"
#include "mashq/lexicon.hpp"

namespace fixture {

using namespace mashq;

// Six builtin words, including a dot-only pair and shared characters.
inline Lexicon small_lexicon() {
  std::map<std::string, std::vector<std::string>> e;
  for (const char* w : {"w00", "w02", "w03", "w09", "w13", "w17"}) e.emplace(w, builtin_lexicon().spelling(w));
  return Lexicon(std::move(e));
}

inline Config small_config() {
  Config c;
  c.codebook_size = 24;
  c.em_iters = 4;
  c.seed = 3;
  return c;
}

struct Trained {
  Lexicon lexicon;
  Corpus train;
  Corpus test;
  Recognizer rec;
  TrainingTrace trace;
};

inline const Trained& trained() {
  static const Trained t = [] {
    Trained x;
    x.lexicon = small_lexicon();
    const auto g = builtin_glyphs();
    x.train = generate_corpus(g, x.lexicon, {6, 0.02, 3.0}, 11, Split::Train);
    x.test = generate_corpus(g, x.lexicon, {3, 0.02, 3.0}, 11, Split::Test);
    x.rec = train(x.train.labeled(), x.lexicon, small_config(), &x.trace);
    return x;
  }();
  return t;
}

// A fresh scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("mashq_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& rel) const { return (path_ / rel).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
