#include "mashq/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mashq/error.hpp"

namespace mashq {

void Config::validate() const {
  features.validate();
  if (codebook_size < 1) throw Error("codebook_size must be at least 1");
  if (kmeans_iters < 1) throw Error("kmeans_iters must be at least 1");
  if (states_per_char < 1) throw Error("states_per_char must be at least 1");
  if (!(exit_init > 0.0 && exit_init < 1.0)) throw Error("exit_init must lie in (0, 1)");
  if (em_iters < 0) throw Error("em_iters must be non-negative");
  if (!(floor > 0.0 && floor < 0.01)) throw Error("floor must lie in (0, 0.01)");
  if (!(line_alpha > 0.0 && line_alpha < 1.0)) throw Error("line_alpha must lie in (0, 1)");
  if (word_gap < 1) throw Error("word_gap must be at least 1");
  if (!(skew_range >= 0.0 && skew_range <= 45.0)) throw Error("skew_range must lie in [0, 45]");
  if (!(skew_step > 0.0)) throw Error("skew_step must be positive");
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

struct Field {
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

long parse_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw Error("config: '" + key + "' expects an integer");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw Error("config: '" + key + "' expects a number");
  return out;
}

// Ordered as written to disk. Weights are handled separately because the
// pair must sum to one.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto add_int = [&t](const char* name, auto member_ptr) {
      t.push_back({name,
                   {[member_ptr](const Config& c) { return std::to_string(member_ptr(const_cast<Config&>(c))); },
                    [member_ptr, name](Config& c, const std::string& v) {
                      member_ptr(c) = static_cast<std::remove_reference_t<decltype(member_ptr(c))>>(parse_long(name, v));
                    }}});
    };
    auto add_real = [&t](const char* name, auto member_ptr) {
      t.push_back({name,
                   {[member_ptr](const Config& c) { return format_double(member_ptr(const_cast<Config&>(c))); },
                    [member_ptr, name](Config& c, const std::string& v) { member_ptr(c) = parse_real(name, v); }}});
    };
    add_int("window", [](Config& c) -> int& { return c.features.window; });
    add_int("shift", [](Config& c) -> int& { return c.features.shift; });
    add_int("cells", [](Config& c) -> int& { return c.features.cells; });
    add_int("patch", [](Config& c) -> int& { return c.features.patch; });
    add_int("bins", [](Config& c) -> int& { return c.features.bins; });
    add_int("codebook_size", [](Config& c) -> std::size_t& { return c.codebook_size; });
    add_int("kmeans_iters", [](Config& c) -> int& { return c.kmeans_iters; });
    add_int("states_per_char", [](Config& c) -> int& { return c.states_per_char; });
    add_real("exit_init", [](Config& c) -> double& { return c.exit_init; });
    add_int("em_iters", [](Config& c) -> int& { return c.em_iters; });
    add_real("floor", [](Config& c) -> double& { return c.floor; });
    add_int("median", [](Config& c) -> bool& { return c.median; });
    add_real("line_alpha", [](Config& c) -> double& { return c.line_alpha; });
    add_int("word_gap", [](Config& c) -> int& { return c.word_gap; });
    add_real("skew_range", [](Config& c) -> double& { return c.skew_range; });
    add_real("skew_step", [](Config& c) -> double& { return c.skew_step; });
    add_int("seed", [](Config& c) -> std::uint64_t& { return c.seed; });
    return t;
  }();
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string format_config(const Config& cfg) {
  std::string out = "# mashq configuration\n";
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(cfg) + "\n";
  out += "weight_sw = " + format_double(cfg.weights[0]) + "\n";
  out += "weight_vh2d = " + format_double(cfg.weights[1]) + "\n";
  return out;
}

Config parse_config(std::string_view text) {
  Config cfg;
  double w_sw = cfg.weights[0];
  double w_vh = cfg.weights[1];
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    const std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "weight_sw") {
      w_sw = parse_real(key, value);
      continue;
    }
    if (key == "weight_vh2d") {
      w_vh = parse_real(key, value);
      continue;
    }
    bool found = false;
    for (const auto& [name, field] : fields()) {
      if (name != key) continue;
      field.set(cfg, value);
      found = true;
      break;
    }
    if (!found) throw Error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  cfg.weights = StreamWeights(w_sw, w_vh);
  cfg.validate();
  return cfg;
}

Config read_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace mashq
