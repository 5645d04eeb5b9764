#pragma once

// Run configuration: a sectioned key-value file, validated in full before any
// computation starts.

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fkmt/box_minimizer.hpp"
#include "fkmt/errors.hpp"
#include "fkmt/problem_library.hpp"
#include "fkmt/stencil_potential.hpp"

namespace fkmt {

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

struct PotentialSpec {
  std::string kind = "fk_cosine";
  int n = 2;
  int r = 1;
  double lambda = 1.0;
  std::vector<double> table;
};

struct ProblemSpec {
  std::optional<TransitionKind> kind;
  std::vector<int> m;
  int l = 5;
  std::optional<std::array<double, 4>> rho;  // nullopt means "auto"
  std::optional<Window> window;              // nullopt means "auto"
  Direction direction = Direction::Ascending;
};

struct OutputSpec {
  std::string directory = "fkmt_out";
  bool json = true;
  bool csv = true;
};

struct GridSpec {
  std::vector<int> l;
  std::vector<int> separations;
  int k = 1;
  int workers = 1;
  [[nodiscard]] bool present() const { return !l.empty() || !separations.empty(); }
};

struct RunConfig {
  PotentialSpec potential;
  ProblemSpec problem;
  SolveOptions solve;
  OutputSpec output;
  GridSpec grid;
  std::uint64_t seed = 0;
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "seed",
      "potential.kind", "potential.n", "potential.r", "potential.lambda", "potential.table",
      "problem.kind", "problem.m", "problem.l", "problem.rho", "problem.window",
      "gap.direction",
      "solve.tol", "solve.max_iter", "solve.algorithm",
      "output.directory", "output.formats",
      "grid.l", "grid.separations", "grid.k", "grid.workers",
  };
  return keys;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& s) {
  T v{};
  const auto t = trim(s);
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ConfigError("invalid value for " + key + ": '" + s + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& s) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) out.push_back(parse_number<T>(key, item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) s += format_double(v[i]);
    else s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace detail

/// Builds a RunConfig from flat "section.key" -> value pairs.
inline RunConfig parse_config(const std::map<std::string, std::string>& kv) {
  using namespace detail;
  for (const auto& [k, v] : kv)
    if (!known_keys().contains(k)) throw ConfigError("unknown config key '" + k + "'");
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    return trim(it->second);
  };

  RunConfig c;
  if (auto v = get("seed")) c.seed = parse_number<std::uint64_t>("seed", *v);

  if (auto v = get("potential.kind")) c.potential.kind = *v;
  if (c.potential.kind != "fk_cosine" && c.potential.kind != "user_table")
    throw ConfigError("potential.kind must be fk_cosine or user_table");
  if (auto v = get("potential.n")) c.potential.n = parse_number<int>("potential.n", *v);
  if (c.potential.n < 2) throw ConfigError("potential.n must be >= 2");
  if (auto v = get("potential.r")) c.potential.r = parse_number<int>("potential.r", *v);
  if (c.potential.r != 1) throw ConfigError("potential.r must be 1 for the built-in potential families");
  if (auto v = get("potential.lambda")) c.potential.lambda = parse_number<double>("potential.lambda", *v);
  if (!(c.potential.lambda > 0.0)) throw ConfigError("potential.lambda must be > 0");
  if (auto v = get("potential.table")) c.potential.table = parse_list<double>("potential.table", *v);
  if (c.potential.kind == "user_table" && c.potential.table.empty())
    throw ConfigError("potential.table is required for user_table");

  try {
    if (auto v = get("problem.kind")) c.problem.kind = parse_transition_kind(*v);
    if (auto v = get("gap.direction")) c.problem.direction = parse_direction(*v);
    if (auto v = get("solve.algorithm")) c.solve.algorithm = parse_algorithm(*v);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (auto v = get("problem.m")) c.problem.m = parse_list<int>("problem.m", *v);
  if (auto v = get("problem.l")) c.problem.l = parse_number<int>("problem.l", *v);
  if (auto v = get("problem.rho"); v && *v != "auto") {
    const auto r = parse_list<double>("problem.rho", *v);
    if (r.size() != 4) throw ConfigError("problem.rho needs four values or 'auto'");
    c.problem.rho = std::array<double, 4>{r[0], r[1], r[2], r[3]};
  }
  if (auto v = get("problem.window"); v && *v != "auto") {
    const auto w = parse_list<int>("problem.window", *v);
    if (w.size() != 2 || w[0] > w[1]) throw ConfigError("problem.window needs 'lo, hi' with lo <= hi, or 'auto'");
    c.problem.window = Window{w[0], w[1]};
  }

  if (auto v = get("solve.tol")) c.solve.tol = parse_number<double>("solve.tol", *v);
  if (!(c.solve.tol > 0.0)) throw ConfigError("solve.tol must be > 0");
  if (auto v = get("solve.max_iter")) c.solve.max_iter = parse_number<long>("solve.max_iter", *v);
  if (c.solve.max_iter < 1) throw ConfigError("solve.max_iter must be >= 1");

  if (auto v = get("output.directory")) c.output.directory = *v;
  if (auto v = get("output.formats")) {
    c.output.json = c.output.csv = false;
    for (const auto& f : split_list(*v)) {
      if (f == "json") c.output.json = true;
      else if (f == "csv") c.output.csv = true;
      else throw ConfigError("output.formats accepts json and csv");
    }
  }

  if (auto v = get("grid.l")) c.grid.l = parse_list<int>("grid.l", *v);
  if (auto v = get("grid.separations")) c.grid.separations = parse_list<int>("grid.separations", *v);
  if (auto v = get("grid.k")) c.grid.k = parse_number<int>("grid.k", *v);
  if (auto v = get("grid.workers")) c.grid.workers = parse_number<int>("grid.workers", *v);
  if (c.grid.k < 1) throw ConfigError("grid.k must be >= 1");
  if (c.grid.workers < 1) throw ConfigError("grid.workers must be >= 1");
  return c;
}

/// Reads a sectioned key-value file into flat "section.key" pairs.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  std::map<std::string, std::string> kv;
  for (const auto& [section, node] : tree) {
    if (node.empty()) {
      kv[section] = node.data();
      continue;
    }
    for (const auto& [key, leaf] : node) {
      if (!leaf.empty()) throw ConfigError("nested keys are not supported: " + section + "." + key);
      kv[section + "." + key] = leaf.data();
    }
  }
  return kv;
}

/// Applies the FK_SEED environment override, if set.
inline void apply_env(RunConfig& c) {
  if (const char* s = std::getenv("FK_SEED")) c.seed = detail::parse_number<std::uint64_t>("FK_SEED", s);
}

/// Canonical echo of everything that determines the computed results
/// (the output block and the sweep grid are excluded).
inline std::map<std::string, std::string> canonical_echo(const RunConfig& c) {
  using detail::join;
  std::map<std::string, std::string> e;
  e["seed"] = std::to_string(c.seed);
  e["potential.kind"] = c.potential.kind;
  e["potential.n"] = std::to_string(c.potential.n);
  e["potential.r"] = std::to_string(c.potential.r);
  if (c.potential.kind == "fk_cosine") e["potential.lambda"] = format_double(c.potential.lambda);
  else e["potential.table"] = join(c.potential.table);
  if (c.problem.kind) e["problem.kind"] = to_string(*c.problem.kind);
  e["problem.m"] = join(c.problem.m);
  e["problem.l"] = std::to_string(c.problem.l);
  e["problem.rho"] = c.problem.rho ? join(std::vector<double>(c.problem.rho->begin(), c.problem.rho->end())) : "auto";
  e["problem.window"] =
      c.problem.window ? std::to_string(c.problem.window->lo) + "," + std::to_string(c.problem.window->hi) : "auto";
  e["gap.direction"] = to_string(c.problem.direction);
  e["solve.tol"] = format_double(c.solve.tol);
  e["solve.max_iter"] = std::to_string(c.solve.max_iter);
  e["solve.algorithm"] = to_string(c.solve.algorithm);
  return e;
}

inline StencilPotential build_potential(const PotentialSpec& p) {
  if (p.kind == "fk_cosine") return make_fk_example(p.n, p.lambda);
  if (p.kind == "user_table") return make_fk_table(p.n, p.table);
  throw ConfigError("unknown potential kind '" + p.kind + "'");
}

/// Markers for separation scale s: transition zones of length s alternate with
/// plateaus of length 2s, so s = 20 and 4 markers give (0, 20, 60, 80).
inline std::vector<int> markers_for_separation(TransitionKind kind, int k, int s) {
  const bool homoclinic = kind == TransitionKind::HomoclinicV0 || kind == TransitionKind::HomoclinicW0;
  const int count = homoclinic ? 4 * k : 4 * k + 2;
  std::vector<int> m{0};
  for (int q = 1; q < count; ++q) m.push_back(m.back() + (q % 2 == 1 ? s : 2 * s));
  return m;
}

}  // namespace fkmt
