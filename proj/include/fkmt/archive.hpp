#pragma once

// Solution archives: JSON records of a run (config echo, gap pair, energy
// levels, solved profiles with their diagnostics) and CSV profile export.

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fkmt/box_minimizer.hpp"
#include "fkmt/diagnostics.hpp"
#include "fkmt/errors.hpp"
#include "fkmt/lattice_config.hpp"
#include "fkmt/run_config.hpp"

namespace fkmt {

inline constexpr const char* kSchemaVersion = "fkmt-1";

using json = nlohmann::json;

// ---- profiles ---------------------------------------------------------------

inline json to_json(const ChainConfig& u) {
  return {{"lo", u.lo()}, {"hi", u.hi()}, {"values", u.values()}, {"left_tail", u.left_tail()},
          {"right_tail", u.right_tail()}};
}

inline ChainConfig chain_from_json(const json& j) {
  const int lo = j.at("lo").get<int>();
  const int hi = j.at("hi").get<int>();
  auto values = j.at("values").get<std::vector<double>>();
  if (static_cast<int>(values.size()) != hi - lo + 1) throw InvalidArgument("profile: values do not match [lo, hi]");
  return {lo, std::move(values), j.at("left_tail").get<double>(), j.at("right_tail").get<double>()};
}

/// Columns i,u over the window; `gnuplot` reads it with `set datafile separator ','`.
inline void write_csv(std::ostream& out, const ChainConfig& u) {
  out << "i,u\n";
  for (int i = u.lo(); i <= u.hi(); ++i) out << i << ',' << format_double(u(i)) << '\n';
}

// ---- archive ----------------------------------------------------------------

struct StoredSolution {
  std::string id;
  std::string kind;  // problem kind, "pinned" for pinned fronts
  std::string direction;
  std::vector<int> m;
  int l = 0;
  std::optional<std::array<double, 4>> rho;
  std::optional<double> pin;
  std::vector<ConstraintRegion> regions;
  SolveReport report;  // wall_time is kept in the archive timestamps instead
  DiagnosticsReport diagnostics;
  friend bool operator==(const StoredSolution&, const StoredSolution&) = default;
};

struct SolutionArchive {
  std::string schema_version = kSchemaVersion;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::string status;  // "complete", "partial", "gap_only"
  int exit_code = 0;
  std::optional<GapPair> gap;
  std::optional<double> c0;
  std::optional<double> c1_up, c1_down, d1_up, d1_down;
  std::optional<std::array<double, 4>> rho;
  std::optional<SubmodularityAudit> submodularity;
  std::vector<StoredSolution> solutions;
  std::vector<LevelCheck> level_checks;
  // excluded from determinism comparisons
  std::string created;
  std::map<std::string, double> wall_time;
  friend bool operator==(const SolutionArchive&, const SolutionArchive&) = default;
};

namespace detail {

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_get(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

inline const char* side_name(ConstraintSide s) { return s == ConstraintSide::Minus ? "rho_minus" : "rho_plus"; }

inline Ordering parse_ordering(const std::string& s) {
  for (auto o : {Ordering::Less, Ordering::Equal, Ordering::Greater, Ordering::Crossing})
    if (s == to_string(o)) return o;
  throw InvalidArgument("unknown ordering '" + s + "'");
}

inline Target parse_target(const std::string& s) {
  if (s == "v0") return Target::V0;
  if (s == "w0") return Target::W0;
  throw InvalidArgument("unknown asymptotic target '" + s + "'");
}

}  // namespace detail

inline json to_json(const SolveReport& r) {
  return {{"profile", to_json(r.profile)},     {"energy", r.energy},
          {"residual_sup", r.residual_sup},    {"iterations", r.iterations},
          {"active_sites", r.active_sites},    {"converged", r.converged}};
}

inline SolveReport report_from_json(const json& j) {
  SolveReport r;
  r.profile = chain_from_json(j.at("profile"));
  r.energy = j.at("energy").get<double>();
  r.residual_sup = j.at("residual_sup").get<double>();
  r.iterations = j.at("iterations").get<long>();
  r.active_sites = j.at("active_sites").get<std::vector<int>>();
  r.converged = j.at("converged").get<bool>();
  return r;
}

inline json to_json(const DiagnosticsReport& d) {
  json ord = json::array();
  for (const auto& [id, o] : d.ordering_vs) ord.push_back({{"id", id}, {"ordering", to_string(o)}});
  return {
      {"birkhoff",
       {{"value", d.birkhoff},
        {"first_crossing", detail::opt_json(d.first_crossing)},
        {"k_range", d.k_range},
        {"note", "necessary condition only"}}},
      {"ordering_vs", ord},
      {"submodularity", {{"pass", d.submodularity_pass}, {"worst_margin", d.submodularity_worst}}},
      {"residual_sup", d.residual_sup},
      {"tail_decay", d.tail_decay},
      {"strict_constraints", {{"value", d.strict_constraints}, {"min_slack", detail::opt_json(d.min_slack)}}},
      {"asymptotic_target", {{"left", to_string(d.left_target)}, {"right", to_string(d.right_target)}}},
  };
}

inline DiagnosticsReport diagnostics_from_json(const json& j) {
  DiagnosticsReport d;
  const auto& b = j.at("birkhoff");
  d.birkhoff = b.at("value").get<bool>();
  d.first_crossing = detail::opt_get<int>(b, "first_crossing");
  d.k_range = b.at("k_range").get<int>();
  for (const auto& o : j.at("ordering_vs"))
    d.ordering_vs.emplace_back(o.at("id").get<std::string>(), detail::parse_ordering(o.at("ordering").get<std::string>()));
  d.submodularity_pass = j.at("submodularity").at("pass").get<bool>();
  d.submodularity_worst = j.at("submodularity").at("worst_margin").get<double>();
  d.residual_sup = j.at("residual_sup").get<double>();
  d.tail_decay = j.at("tail_decay").get<double>();
  d.strict_constraints = j.at("strict_constraints").at("value").get<bool>();
  d.min_slack = detail::opt_get<double>(j.at("strict_constraints"), "min_slack");
  d.left_target = detail::parse_target(j.at("asymptotic_target").at("left").get<std::string>());
  d.right_target = detail::parse_target(j.at("asymptotic_target").at("right").get<std::string>());
  return d;
}

inline json to_json(const StoredSolution& s) {
  json regions = json::array();
  for (const auto& r : s.regions)
    regions.push_back({{"first", r.first}, {"last", r.last}, {"side", detail::side_name(r.side)},
                       {"rho_index", r.rho_index}, {"rho", r.rho}});
  return {{"id", s.id},
          {"problem",
           {{"kind", s.kind},
            {"direction", s.direction},
            {"m", s.m},
            {"l", s.l},
            {"rho", detail::opt_json(s.rho)},
            {"pin", detail::opt_json(s.pin)}}},
          {"regions", regions},
          {"report", to_json(s.report)},
          {"diagnostics", to_json(s.diagnostics)}};
}

inline StoredSolution solution_from_json(const json& j) {
  StoredSolution s;
  s.id = j.at("id").get<std::string>();
  const auto& p = j.at("problem");
  s.kind = p.at("kind").get<std::string>();
  s.direction = p.at("direction").get<std::string>();
  s.m = p.at("m").get<std::vector<int>>();
  s.l = p.at("l").get<int>();
  s.rho = detail::opt_get<std::array<double, 4>>(p, "rho");
  s.pin = detail::opt_get<double>(p, "pin");
  for (const auto& r : j.at("regions")) {
    ConstraintRegion reg;
    reg.first = r.at("first").get<int>();
    reg.last = r.at("last").get<int>();
    reg.side = r.at("side").get<std::string>() == "rho_minus" ? ConstraintSide::Minus : ConstraintSide::Plus;
    reg.rho_index = r.at("rho_index").get<int>();
    reg.rho = r.at("rho").get<double>();
    s.regions.push_back(reg);
  }
  s.report = report_from_json(j.at("report"));
  s.diagnostics = diagnostics_from_json(j.at("diagnostics"));
  return s;
}

inline json to_json(const SolutionArchive& a) {
  json j;
  j["schema_version"] = a.schema_version;
  j["config"] = a.config;
  j["seed"] = a.seed;
  j["status"] = a.status;
  j["exit_code"] = a.exit_code;
  j["gap"] = a.gap ? json{{"v0", a.gap->v0}, {"w0", a.gap->w0}, {"rho_bar", a.gap->rho_bar}} : json(nullptr);
  j["levels"] = {{"c0", detail::opt_json(a.c0)},
                 {"c1_up", detail::opt_json(a.c1_up)},
                 {"c1_down", detail::opt_json(a.c1_down)},
                 {"d1_up", detail::opt_json(a.d1_up)},
                 {"d1_down", detail::opt_json(a.d1_down)}};
  j["rho"] = detail::opt_json(a.rho);
  j["submodularity"] = a.submodularity
                           ? json{{"trials", a.submodularity->trials}, {"worst_margin", a.submodularity->worst_margin}}
                           : json(nullptr);
  j["solutions"] = json::array();
  for (const auto& s : a.solutions) j["solutions"].push_back(to_json(s));
  j["level_checks"] = json::array();
  for (const auto& c : a.level_checks)
    j["level_checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}});
  j["timestamps"] = {{"created", a.created}, {"wall_time", a.wall_time}};
  return j;
}

inline SolutionArchive archive_from_json(const json& j) {
  SolutionArchive a;
  a.schema_version = j.at("schema_version").get<std::string>();
  if (a.schema_version != kSchemaVersion) throw InvalidArgument("unsupported archive schema '" + a.schema_version + "'");
  a.config = j.at("config").get<std::map<std::string, std::string>>();
  a.seed = j.at("seed").get<std::uint64_t>();
  a.status = j.at("status").get<std::string>();
  a.exit_code = j.at("exit_code").get<int>();
  if (!j.at("gap").is_null()) {
    const auto& g = j.at("gap");
    a.gap = GapPair{g.at("v0").get<double>(), g.at("w0").get<double>(), g.at("rho_bar").get<double>()};
  }
  const auto& lv = j.at("levels");
  a.c0 = detail::opt_get<double>(lv, "c0");
  a.c1_up = detail::opt_get<double>(lv, "c1_up");
  a.c1_down = detail::opt_get<double>(lv, "c1_down");
  a.d1_up = detail::opt_get<double>(lv, "d1_up");
  a.d1_down = detail::opt_get<double>(lv, "d1_down");
  a.rho = detail::opt_get<std::array<double, 4>>(j, "rho");
  if (!j.at("submodularity").is_null()) {
    SubmodularityAudit s;
    s.trials = j.at("submodularity").at("trials").get<int>();
    s.worst_margin = j.at("submodularity").at("worst_margin").get<double>();
    a.submodularity = s;
  }
  for (const auto& s : j.at("solutions")) a.solutions.push_back(solution_from_json(s));
  for (const auto& c : j.at("level_checks"))
    a.level_checks.push_back({c.at("name").get<std::string>(), c.at("pass").get<bool>(), c.at("margin").get<double>()});
  a.created = j.at("timestamps").at("created").get<std::string>();
  a.wall_time = j.at("timestamps").at("wall_time").get<std::map<std::string, double>>();
  return a;
}

inline std::string dump_archive(const SolutionArchive& a) { return to_json(a).dump(2) + "\n"; }

/// Archive text without the timestamps block, for determinism comparisons.
inline std::string dump_without_timestamps(const SolutionArchive& a) {
  auto j = to_json(a);
  j.erase("timestamps");
  return j.dump();
}

inline void save_archive(const std::string& path, const SolutionArchive& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write archive " + path);
  out << dump_archive(a);
}

inline SolutionArchive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read archive " + path);
  try {
    return archive_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed archive: ") + e.what());
  }
}

}  // namespace fkmt
