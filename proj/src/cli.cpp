#include "mashq/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <vector>

#include "mashq/config.hpp"
#include "mashq/error.hpp"
#include "mashq/features.hpp"
#include "mashq/harness.hpp"
#include "mashq/lexicon.hpp"
#include "mashq/preprocess.hpp"
#include "mashq/segment.hpp"

namespace fs = std::filesystem;

namespace mashq {

namespace {

Config load_config_or_default(const std::string& path) {
  return path.empty() ? Config{} : read_config(path);
}

BinaryImage load_page(const std::string& path) {
  auto img = load_pnm_file(path);
  if (auto* gray = std::get_if<GrayImage>(&img)) return binarize_otsu(*gray);
  return std::get<BinaryImage>(std::move(img));
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

struct Options {
  std::string input;
  std::string output;
  std::string config;
  std::string corpus;
  std::string lexicon = "builtin";
  std::string glyphs = "builtin";
  std::string bundle;
  std::string stream = "both";
  std::string split = "test";
  std::string confusion;
  std::uint64_t seed = 0;
  int n_train = 10;
  int n_test = 5;
  double noise = 0.03;
  double skew = 5.0;
};

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stream HMM recognizer for cursive word images", "mashq"};
  app.require_subcommand(1);
  Options o;

  auto* pre = app.add_subcommand("preprocess", "Binarize, denoise and deskew a page");
  pre->add_option("-i,--input", o.input, "input PNM")->required();
  pre->add_option("-o,--output", o.output, "output PBM")->required();
  pre->add_option("-c,--config", o.config, "configuration file");
  pre->add_option("--seed", o.seed, "random seed (unused; accepted for uniformity)");

  auto* seg = app.add_subcommand("segment", "Split a page into lines and words");
  seg->add_option("-i,--input", o.input, "deskewed page PNM")->required();
  seg->add_option("-o,--output", o.output, "directory for word PBMs")->required();
  seg->add_option("-c,--config", o.config, "configuration file");
  seg->add_option("--seed", o.seed, "random seed (unused; accepted for uniformity)");

  auto* feat = app.add_subcommand("features", "Dump the feature streams of a word image");
  feat->add_option("-i,--input", o.input, "word PBM")->required();
  feat->add_option("-s,--stream", o.stream, "SW, VH2D or both")->check(CLI::IsMember({"SW", "VH2D", "both"}));
  feat->add_option("-c,--config", o.config, "configuration file");
  feat->add_option("--seed", o.seed, "random seed (unused; accepted for uniformity)");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic train/test corpus");
  gen->add_option("-g,--glyphs", o.glyphs, "glyph directory or 'builtin'");
  gen->add_option("-l,--lexicon", o.lexicon, "lexicon TSV or 'builtin'");
  gen->add_option("-o,--output", o.output, "corpus directory")->required();
  gen->add_option("--train", o.n_train, "training samples per word")->check(CLI::PositiveNumber);
  gen->add_option("--test", o.n_test, "test samples per word")->check(CLI::NonNegativeNumber);
  gen->add_option("--noise", o.noise, "salt-and-pepper probability")->check(CLI::Range(0.0, 0.5));
  gen->add_option("--skew", o.skew, "maximum rotation in degrees")->check(CLI::Range(0.0, 20.0));
  gen->add_option("--seed", o.seed, "random seed")->required();

  auto* glyphs = app.add_subcommand("glyphs", "Write the builtin glyph set and lexicon");
  glyphs->add_option("-o,--output", o.output, "output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a recognizer bundle");
  train_cmd->add_option("--corpus", o.corpus, "corpus directory")->required();
  train_cmd->add_option("-l,--lexicon", o.lexicon, "lexicon TSV or 'builtin'");
  train_cmd->add_option("-c,--config", o.config, "configuration file");
  train_cmd->add_option("-o,--output", o.output, "bundle directory")->required();
  train_cmd->add_option("--seed", o.seed, "random seed")->required();

  auto* rec_cmd = app.add_subcommand("recognize", "Rank the lexicon for one word image");
  rec_cmd->add_option("-b,--bundle", o.bundle, "bundle directory")->required();
  rec_cmd->add_option("-i,--input", o.input, "word PBM")->required();
  rec_cmd->add_option("--seed", o.seed, "random seed (unused; accepted for uniformity)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a bundle on a corpus split");
  eval_cmd->add_option("-b,--bundle", o.bundle, "bundle directory")->required();
  eval_cmd->add_option("--corpus", o.corpus, "corpus directory")->required();
  eval_cmd->add_option("--split", o.split, "train or test")->check(CLI::IsMember({"train", "test"}));
  eval_cmd->add_option("--confusion", o.confusion, "write the combined confusion table here");
  eval_cmd->add_option("--seed", o.seed, "random seed (unused; accepted for uniformity)");

  std::vector<std::string> argv_rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_rev.begin(), argv_rev.end());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*pre) {
      const Config cfg = load_config_or_default(o.config);
      BinaryImage page = load_page(o.input);
      if (cfg.median) page = median3x3(page);
      const auto est = estimate_skew_hough(page, cfg.skew_range, cfg.skew_step);
      save_pnm_file(deskew(page, est), o.output);
      out << "skew\t" << format_double(est.angle) << "\tpeak\t" << format_double(est.peak_score) << "\n";
    } else if (*seg) {
      const Config cfg = load_config_or_default(o.config);
      const BinaryImage page = load_page(o.input);
      fs::create_directories(o.output);
      std::string tsv = "line\tword\tx0\ty0\tx1\ty1\tfile\n";
      const auto lines = segment_lines(page, cfg.line_alpha);
      for (std::size_t li = 0; li < lines.size(); ++li) {
        const BBox band{0, lines[li].top, page.width(), lines[li].bottom};
        const BinaryImage line = crop(page, band);
        for (const auto& w : segment_words(line, cfg.word_gap)) {
          const std::string name = "line" + std::to_string(li) + "_word" + std::to_string(w.order_index) + ".pbm";
          save_pnm_file(crop(line, w.bbox), (fs::path(o.output) / name).string());
          tsv += std::to_string(li) + "\t" + std::to_string(w.order_index) + "\t" + std::to_string(w.bbox.x0) +
                 "\t" + std::to_string(w.bbox.y0 + band.y0) + "\t" + std::to_string(w.bbox.x1) + "\t" +
                 std::to_string(w.bbox.y1 + band.y0) + "\t" + name + "\n";
        }
      }
      write_text(tsv, (fs::path(o.output) / "words.tsv").string());
      out << tsv;
    } else if (*feat) {
      const Config cfg = load_config_or_default(o.config);
      const auto [sw, vh] = extract_streams(prepare_word(load_binary_file(o.input), cfg), cfg.features);
      if (o.stream != "VH2D") out << format_feature_dump(sw);
      if (o.stream != "SW") out << format_feature_dump(vh);
    } else if (*gen) {
      const GlyphSet g = o.glyphs == "builtin" ? builtin_glyphs() : read_glyph_dir(o.glyphs);
      const Lexicon lex = o.lexicon == "builtin" ? builtin_lexicon() : read_lexicon(o.lexicon);
      std::vector<Corpus> corpora;
      corpora.push_back(generate_corpus(g, lex, {o.n_train, o.noise, o.skew}, o.seed, Split::Train));
      if (o.n_test > 0) corpora.push_back(generate_corpus(g, lex, {o.n_test, o.noise, o.skew}, o.seed, Split::Test));
      write_corpus(corpora, o.output);
      std::size_t n = 0;
      for (const auto& c : corpora) n += c.samples.size();
      out << "wrote " << n << " samples to " << o.output << "\n";
    } else if (*glyphs) {
      write_glyph_dir(builtin_glyphs(), o.output);
      write_text(format_lexicon(builtin_lexicon()), (fs::path(o.output) / "lexicon.tsv").string());
    } else if (*train_cmd) {
      Config cfg = load_config_or_default(o.config);
      cfg.seed = o.seed;
      const Lexicon lex = o.lexicon == "builtin" ? builtin_lexicon() : read_lexicon(o.lexicon);
      const Corpus corpus = read_corpus(o.corpus, Split::Train);
      const auto data = corpus.labeled();
      const Recognizer rec = train(data, lex, cfg);
      save_bundle(rec, o.output);
      out << "trained on " << data.size() << " samples; bundle written to " << o.output << "\n";
    } else if (*rec_cmd) {
      const Recognizer rec = load_bundle(o.bundle);
      const auto result = recognize(rec, load_binary_file(o.input));
      out << "rank\tword\tfused\tSW\tVH2D\n";
      for (std::size_t r = 0; r < result.ranked.size(); ++r) {
        const auto& c = result.ranked[r];
        out << r << "\t" << c.word << "\t" << format_double(c.fused) << "\t" << format_double(c.stream_scores[0])
            << "\t" << format_double(c.stream_scores[1]) << "\n";
      }
    } else if (*eval_cmd) {
      const Recognizer rec = load_bundle(o.bundle);
      const Corpus test = read_corpus(o.corpus, parse_split(o.split));
      const EvalReport report = evaluate(rec, test);
      out << format_report(report);
      if (!o.confusion.empty()) write_text(format_confusion(report), o.confusion);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace mashq
