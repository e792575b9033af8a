#include "mashq/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mashq/error.hpp"

namespace mashq {

namespace {

void put_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void put_row(std::string& out, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ' ';
    put_double(out, row[i]);
  }
  out += '\n';
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  int line_no() const { return line_; }

  std::vector<std::string_view> next() {
    if (done()) fail("unexpected end of file");
    const auto nl = text_.find('\n', pos_);
    const auto end = nl == std::string_view::npos ? text_.size() : nl;
    const auto line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_;
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      const auto start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error("model file line " + std::to_string(line_) + ": " + what);
  }

  double to_double(std::string_view tok) const {
    // strtod rather than from_chars: libstdc++ 11 lacks floating from_chars.
    std::string s(tok);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) fail("bad number '" + s + "'");
    return v;
  }

  std::size_t to_size(std::string_view tok) const {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail("bad count '" + std::string(tok) + "'");
    return v;
  }

  std::vector<double> row(std::size_t n) {
    const auto tok = next();
    if (tok.size() != n) fail("expected " + std::to_string(n) + " values");
    std::vector<double> v;
    v.reserve(n);
    for (auto t : tok) v.push_back(to_double(t));
    return v;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 0;
};

}  // namespace

std::string format_model_file(const ModelFile& f) {
  std::string out = "MSHMM v1\n";
  if (f.codebook) {
    const auto& cb = *f.codebook;
    out += "codebook " + std::to_string(cb.size()) + " " + std::to_string(cb.dim) + "\n";
    for (const auto& c : cb.centroids) put_row(out, c);
  }
  if (f.hmm) {
    const auto& m = *f.hmm;
    out += "hmm " + std::to_string(m.states()) + " " + std::to_string(m.symbols()) + "\n";
    out += "exit ";
    put_double(out, m.exit);
    out += "\npi ";
    put_row(out, m.pi);
    out += "A\n";
    for (std::size_t i = 0; i < m.states(); ++i) put_row(out, m.A.row(i));
    out += "B\n";
    for (std::size_t i = 0; i < m.states(); ++i) put_row(out, m.B.row(i));
  }
  if (!f.anchors.empty()) {
    if (f.labels.size() != f.anchors.size()) throw Error("anchors and labels differ in length");
    out += "anchors " + std::to_string(f.anchors.size()) + "\n";
    for (std::size_t i = 0; i < f.anchors.size(); ++i)
      out += std::to_string(f.anchors[i]) + " " + f.labels[i] + "\n";
  }
  out += "end\n";
  return out;
}

ModelFile parse_model_file(std::string_view text) {
  LineReader r(text);
  {
    const auto head = r.next();
    if (head.size() != 2 || head[0] != "MSHMM" || head[1] != "v1") r.fail("missing 'MSHMM v1' header");
  }
  ModelFile f;
  for (;;) {
    const auto tok = r.next();
    if (tok.empty()) r.fail("blank line");
    if (tok[0] == "end") break;
    if (tok[0] == "codebook") {
      if (tok.size() != 3) r.fail("codebook header needs <count> <dim>");
      Codebook cb;
      const auto k = r.to_size(tok[1]);
      cb.dim = r.to_size(tok[2]);
      for (std::size_t i = 0; i < k; ++i) cb.centroids.push_back(r.row(cb.dim));
      f.codebook = std::move(cb);
    } else if (tok[0] == "hmm") {
      if (tok.size() != 3) r.fail("hmm header needs <states> <symbols>");
      const auto s = r.to_size(tok[1]);
      const auto k = r.to_size(tok[2]);
      if (s == 0 || k == 0) r.fail("empty model");
      DiscreteHMM m;
      auto ex = r.next();
      if (ex.size() != 2 || ex[0] != "exit") r.fail("expected 'exit <p>'");
      m.exit = r.to_double(ex[1]);
      auto pi = r.next();
      if (pi.size() != s + 1 || pi[0] != "pi") r.fail("expected 'pi' with " + std::to_string(s) + " values");
      for (std::size_t i = 1; i <= s; ++i) m.pi.push_back(r.to_double(pi[i]));
      if (auto a = r.next(); a.size() != 1 || a[0] != "A") r.fail("expected 'A'");
      m.A = Matrix(s, s);
      for (std::size_t i = 0; i < s; ++i) {
        const auto row = r.row(s);
        std::copy(row.begin(), row.end(), m.A.row(i).begin());
      }
      if (auto b = r.next(); b.size() != 1 || b[0] != "B") r.fail("expected 'B'");
      m.B = Matrix(s, k);
      for (std::size_t i = 0; i < s; ++i) {
        const auto row = r.row(k);
        std::copy(row.begin(), row.end(), m.B.row(i).begin());
      }
      f.hmm = std::move(m);
    } else if (tok[0] == "anchors") {
      if (tok.size() != 2) r.fail("anchors header needs <count>");
      const auto n = r.to_size(tok[1]);
      for (std::size_t i = 0; i < n; ++i) {
        const auto a = r.next();
        if (a.size() != 2) r.fail("expected '<state> <label>'");
        f.anchors.push_back(static_cast<int>(r.to_size(a[0])));
        f.labels.emplace_back(a[1]);
      }
    } else {
      r.fail("unknown section '" + std::string(tok[0]) + "'");
    }
  }
  if (f.hmm) check_stochastic(*f.hmm, 1e-9);
  return f;
}

ModelFile read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_model_file(ss.str());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_model_file(const ModelFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << format_model_file(file);
  if (!out) throw Error("write failed for " + path);
}

}  // namespace mashq
