#pragma once

// Subcommand implementations: gap, solve, verify, sweep. Each returns the
// process exit code (0 ok, 1 verify mismatch, 2 invalid config or problem,
// 3 no convergence, 4 gap condition failed).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "fkmt/archive.hpp"
#include "fkmt/box_minimizer.hpp"
#include "fkmt/diagnostics.hpp"
#include "fkmt/energy.hpp"
#include "fkmt/errors.hpp"
#include "fkmt/problem_library.hpp"
#include "fkmt/run_config.hpp"

namespace fkmt {

enum ExitCode : int { kExitOk = 0, kExitMismatch = 1, kExitInvalid = 2, kExitNoConvergence = 3, kExitGapFailed = 4 };

inline constexpr int kSubmodularityTrials = 200;

/// Result of one pipeline run, before anything is written.
struct RunOutcome {
  int exit_code = kExitOk;
  SolutionArchive archive;
  std::vector<std::string> lines;  // stdout, in order
  std::string error;
};

namespace detail {

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline RunConfig load_run_config(const std::string& path) {
  auto cfg = parse_config(read_config_file(path));
  apply_env(cfg);
  return cfg;
}

/// Everything about the problem that can be checked without computing anything.
inline TransitionPattern validated_pattern(const RunConfig& cfg) {
  if (!cfg.problem.kind) throw ConfigError("problem.kind is required");
  const auto kind = *cfg.problem.kind;
  auto pattern = make_pattern(kind, kind == TransitionKind::BasicHeteroclinic ? std::vector<int>{} : cfg.problem.m,
                              cfg.problem.l);
  if (cfg.problem.window) check_window(pattern, *cfg.problem.window, cfg.potential.r);
  return pattern;
}

inline StoredSolution stored(std::string id, std::string kind, std::string direction, const SolveReport& rep,
                             std::map<std::string, double>& wall) {
  StoredSolution s;
  s.id = std::move(id);
  s.kind = std::move(kind);
  s.direction = std::move(direction);
  s.report = rep;
  wall[s.id] = rep.wall_time;
  s.report.wall_time = 0.0;
  return s;
}

inline DiagnosticsContext make_context(const StencilPotential& pot, const SolutionArchive& a, const GroundLevel& ground) {
  DiagnosticsContext ctx;
  ctx.pot = &pot;
  ctx.gap = *a.gap;
  ctx.ground = ground;
  if (a.submodularity) ctx.submodularity = *a.submodularity;
  for (const auto& s : a.solutions) ctx.others.emplace_back(s.id, s.report.profile);
  return ctx;
}

inline void warn_diagnostics(const StoredSolution& s, std::vector<std::string>& lines) {
  const auto& d = s.diagnostics;
  if (!s.report.converged) lines.push_back("WARN " + s.id + ": not converged");
  if (d.residual_sup > 1e-8) lines.push_back("WARN " + s.id + ": residual_sup " + format_double(d.residual_sup));
  if (!d.strict_constraints)
    lines.push_back("WARN " + s.id + ": constraint active, min slack " + format_double(d.min_slack.value_or(0.0)));
  if (!d.submodularity_pass)
    lines.push_back("WARN " + s.id + ": submodularity margin " + format_double(d.submodularity_worst));
}

}  // namespace detail

/// Runs gap -> fronts -> rho -> pinned levels -> multitransition -> diagnostics
/// for a validated config. Nothing is written; see write_outputs.
inline RunOutcome run_pipeline(const RunConfig& cfg) {
  RunOutcome out;
  auto& a = out.archive;
  a.config = canonical_echo(cfg);
  a.seed = cfg.seed;
  a.status = "partial";

  TransitionPattern pattern;
  Window window;
  StencilPotential pot;
  try {
    pattern = detail::validated_pattern(cfg);
    window = cfg.problem.window.value_or(default_window(pattern, cfg.potential.r));
    check_window(pattern, window, cfg.potential.r);
    pot = build_potential(cfg.potential);
  } catch (const Error& e) {
    out.exit_code = kExitInvalid;
    out.error = e.what();
    a.exit_code = out.exit_code;
    return out;
  }

  const int r = pot.r();
  const GroundLevel ground = ground_level(pot);
  try {
    a.gap = find_periodic_and_gap(pot, ground);
  } catch (const GapConditionFailed& e) {
    out.exit_code = kExitGapFailed;
    out.error = e.what();
    a.exit_code = out.exit_code;
    return out;
  }
  const GapPair gap = *a.gap;
  a.c0 = ground.c0;
  if (cfg.problem.rho) {
    try {
      validate_rho(*cfg.problem.rho, gap);
    } catch (const InvalidPattern& e) {
      out.exit_code = kExitInvalid;
      out.error = e.what();
      a.exit_code = out.exit_code;
      return out;
    }
  }
  a.submodularity = submodularity_audit(pot, gap, ground.c0, kSubmodularityTrials, cfg.seed);

  auto& wall = a.wall_time;
  auto finish = [&] {
    const auto ctx = detail::make_context(pot, a, ground);
    for (auto& s : a.solutions) {
      s.diagnostics = compute_diagnostics(s.id, s.report.profile, s.regions, ctx);
      detail::warn_diagnostics(s, out.lines);
    }
    a.exit_code = out.exit_code;
  };

  try {
    const Window front_window{-60 * r, 60 * r};
    HeteroclinicFamily up, down;
    try {
      up = find_heteroclinic(gap, Direction::Ascending, front_window, pot, ground, cfg.solve);
      a.solutions.push_back(detail::stored("front_up", "basic_heteroclinic", "ascending", up.report, wall));
      down = find_heteroclinic(gap, Direction::Descending, front_window, pot, ground, cfg.solve);
      a.solutions.push_back(detail::stored("front_down", "basic_heteroclinic", "descending", down.report, wall));
    } catch (const DegenerateFront& e) {
      out.exit_code = kExitGapFailed;
      out.error = e.what();
      finish();
      return out;
    }
    a.c1_up = up.report.energy;
    a.c1_down = down.report.energy;

    try {
      pattern.rho = cfg.problem.rho ? *cfg.problem.rho : choose_rho(up, down, gap);
    } catch (const RhoSelectionFailed& e) {
      out.exit_code = kExitInvalid;
      out.error = e.what();
      finish();
      return out;
    }
    a.rho = pattern.rho;

    for (auto [dir, fam, id] : {std::tuple{Direction::Ascending, &up, "pinned_up"},
                                std::tuple{Direction::Descending, &down, "pinned_down"}}) {
      const auto lvl = solve_pinned_level(gap, pattern.rho, dir, pot, ground, front_window, *fam, cfg.solve);
      auto s = detail::stored(id, "pinned", to_string(dir), lvl.best, wall);
      s.rho = pattern.rho;
      s.pin = lvl.best.profile(0);
      a.solutions.push_back(std::move(s));
      (dir == Direction::Ascending ? a.d1_up : a.d1_down) = lvl.d1;
    }

    LevelInputs levels{a.c1_up, a.c1_down, a.d1_up, a.d1_down, {}};
    if (pattern.kind != TransitionKind::BasicHeteroclinic) {
      const auto res = solve_multitransition(pattern, gap, pot, ground, window, up, down, cfg.solve);
      auto s = detail::stored("multitransition", to_string(pattern.kind), "", res.report, wall);
      s.m = pattern.m;
      s.l = pattern.l;
      s.rho = pattern.rho;
      s.regions = res.box.regions;
      a.solutions.push_back(std::move(s));
      levels.patterns.push_back({"multitransition", res.report.energy, std::max(*a.c1_up, *a.c1_down),
                                 concatenation_level(pattern, *a.c1_up, *a.c1_down)});
    }
    a.level_checks = level_summary(levels).checks;
    for (const auto& c : a.level_checks)
      if (!c.pass) out.lines.push_back("WARN level " + c.name + ": margin " + format_double(c.margin));
    a.status = "complete";
  } catch (const NoConvergence& e) {
    out.exit_code = kExitNoConvergence;
    out.error = e.what();
    a.solutions.push_back(detail::stored("unconverged", "partial", "", e.report(), wall));
  }
  finish();
  return out;
}

/// archive.json and one <id>.csv per solution, as selected by output.formats.
inline void write_outputs(const OutputSpec& o, const std::string& dir, SolutionArchive a) {
  std::filesystem::create_directories(dir);
  a.created = detail::utc_now();
  if (o.json) save_archive((std::filesystem::path(dir) / "archive.json").string(), a);
  if (o.csv)
    for (const auto& s : a.solutions) {
      std::ofstream f(std::filesystem::path(dir) / (s.id + ".csv"));
      write_csv(f, s.report.profile);
    }
}

inline void print_outcome(const RunOutcome& r, std::ostream& out, std::ostream& err) {
  for (const auto& l : r.lines) out << l << '\n';
  if (!r.error.empty()) err << "error: " << r.error << '\n';
}

// ---- subcommands ------------------------------------------------------------

inline int cmd_gap(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  StencilPotential pot;
  try {
    cfg = detail::load_run_config(config_path);
    pot = build_potential(cfg.potential);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  SolutionArchive a;
  a.config = canonical_echo(cfg);
  a.seed = cfg.seed;
  a.status = "gap_only";
  const auto ground = ground_level(pot);
  a.c0 = ground.c0;
  try {
    a.gap = find_periodic_and_gap(pot, ground);
  } catch (const GapConditionFailed& e) {
    err << "error: " << e.what() << '\n';
    a.exit_code = kExitGapFailed;
    write_outputs(cfg.output, cfg.output.directory, a);
    return kExitGapFailed;
  }
  for (const auto& w : ground.warnings) out << "WARN " << w << '\n';
  out << "v0=" << format_double(a.gap->v0) << " w0=" << format_double(a.gap->w0)
      << " rho_bar=" << format_double(a.gap->rho_bar) << " c0=" << format_double(ground.c0) << '\n';
  write_outputs(cfg.output, cfg.output.directory, a);
  return kExitOk;
}

inline int cmd_solve(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = detail::load_run_config(config_path);
    detail::validated_pattern(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  const auto r = run_pipeline(cfg);
  print_outcome(r, out, err);
  if (r.exit_code == kExitInvalid) return r.exit_code;
  write_outputs(cfg.output, cfg.output.directory, r.archive);
  const auto& a = r.archive;
  if (a.gap)
    out << "gap v0=" << format_double(a.gap->v0) << " w0=" << format_double(a.gap->w0) << '\n';
  for (const auto& s : a.solutions)
    out << s.id << " energy=" << format_double(s.report.energy) << " iterations=" << s.report.iterations
        << " converged=" << (s.report.converged ? "true" : "false") << '\n';
  out << "status=" << a.status << " exit=" << r.exit_code << '\n';
  return r.exit_code;
}

/// Recomputes diagnostics and energies from the stored profiles and compares
/// them bitwise with the stored reports.
inline int cmd_verify(const std::string& archive_path, std::ostream& out, std::ostream& err) {
  SolutionArchive a;
  StencilPotential pot;
  try {
    a = load_archive(archive_path);
    pot = build_potential(parse_config(a.config).potential);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  std::vector<std::string> mismatches;
  const auto ground = ground_level(pot);
  if (a.c0 && *a.c0 != ground.c0) mismatches.push_back("c0");
  if (a.gap) {
    try {
      if (find_periodic_and_gap(pot, ground) != *a.gap) mismatches.push_back("gap");
    } catch (const GapConditionFailed&) {
      mismatches.push_back("gap");
    }
  }
  if (a.submodularity && a.gap &&
      submodularity_audit(pot, *a.gap, ground.c0, a.submodularity->trials, a.seed) != *a.submodularity)
    mismatches.push_back("submodularity");
  if (!a.solutions.empty() && a.gap) {
    const auto ctx = detail::make_context(pot, a, ground);
    for (const auto& s : a.solutions) {
      try {
        if (compute_diagnostics(s.id, s.report.profile, s.regions, ctx) != s.diagnostics)
          mismatches.push_back(s.id + ": diagnostics");
        if (J1_total(s.report.profile, pot, ground).total != s.report.energy) mismatches.push_back(s.id + ": energy");
      } catch (const Error& e) {
        mismatches.push_back(s.id + ": " + e.what());
      }
    }
  }
  for (const auto& m : mismatches) out << "MISMATCH " << m << '\n';
  if (!mismatches.empty()) return kExitMismatch;
  out << "verify ok: " << a.solutions.size() << " solutions\n";
  return kExitOk;
}

struct SweepCell {
  int separation = 0;
  int l = 0;
  RunConfig config;
  std::string directory;
};

struct SweepRow {
  int separation = 0;
  int l = 0;
  int exit_code = 0;
  std::optional<double> b;
  std::optional<double> concatenation;
  std::optional<double> min_slack;
  std::optional<ChainConfig> profile;
};

/// Expands the grid into cells; every cell's pattern is validated up front.
inline std::vector<SweepCell> sweep_cells(const RunConfig& cfg) {
  if (!cfg.grid.present()) throw ConfigError("sweep needs a [grid] block with l and/or separations");
  if (!cfg.problem.kind || *cfg.problem.kind == TransitionKind::BasicHeteroclinic)
    throw ConfigError("sweep needs a multitransition problem.kind");
  const auto ls = cfg.grid.l.empty() ? std::vector<int>{cfg.problem.l} : cfg.grid.l;
  std::vector<SweepCell> cells;
  auto add = [&](int s, int l, std::vector<int> m) {
    SweepCell c{s, l, cfg, ""};
    c.config.problem.m = std::move(m);
    c.config.problem.l = l;
    c.config.problem.window.reset();
    c.directory = (std::filesystem::path(cfg.output.directory) /
                   ("cell_s" + std::to_string(s) + "_l" + std::to_string(l))).string();
    detail::validated_pattern(c.config);
    cells.push_back(std::move(c));
  };
  for (int l : ls) {
    if (cfg.grid.separations.empty()) add(0, l, cfg.problem.m);
    for (int s : cfg.grid.separations) {
      if (s < 1) throw ConfigError("grid.separations must be positive");
      add(s, l, markers_for_separation(*cfg.problem.kind, cfg.grid.k, s));
    }
  }
  return cells;
}

inline int cmd_sweep(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::vector<SweepCell> cells;
  try {
    cfg = detail::load_run_config(config_path);
    cells = sweep_cells(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  std::vector<RunOutcome> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < cells.size();) {
      results[i] = run_pipeline(cells[i].config);
      if (results[i].exit_code != kExitInvalid)
        write_outputs(cells[i].config.output, cells[i].directory, results[i].archive);
    }
  };
  std::vector<std::thread> pool;
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(cfg.grid.workers), cells.size());
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<SweepRow> rows;
  int exit_code = kExitOk;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& res = results[i];
    for (const auto& l : res.lines) out << "[s=" << cells[i].separation << " l=" << cells[i].l << "] " << l << '\n';
    if (!res.error.empty()) err << "[s=" << cells[i].separation << " l=" << cells[i].l << "] error: " << res.error << '\n';
    if (res.exit_code != kExitOk && exit_code == kExitOk) exit_code = res.exit_code;
    SweepRow row{cells[i].separation, cells[i].l, res.exit_code, {}, {}, {}, {}};
    for (const auto& s : res.archive.solutions)
      if (s.id == "multitransition") {
        row.b = s.report.energy;
        row.min_slack = s.diagnostics.min_slack;
        row.profile = s.report.profile;
      }
    if (res.archive.c1_up && res.archive.c1_down) {
      auto p = make_pattern(*cfg.problem.kind, cells[i].config.problem.m, cells[i].l);
      row.concatenation = concatenation_level(p, *res.archive.c1_up, *res.archive.c1_down);
    }
    rows.push_back(std::move(row));
  }

  std::filesystem::create_directories(cfg.output.directory);
  std::ofstream csv(std::filesystem::path(cfg.output.directory) / "sweep_summary.csv");
  csv << "separation,l,exit_code,b,concatenation,b_minus_concatenation,min_slack\n";
  auto opt = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
  out << "separation l exit b b-concatenation\n";
  for (const auto& r : rows) {
    const std::string diff = r.b && r.concatenation ? format_double(*r.b - *r.concatenation) : std::string();
    csv << r.separation << ',' << r.l << ',' << r.exit_code << ',' << opt(r.b) << ',' << opt(r.concatenation) << ','
        << diff << ',' << opt(r.min_slack) << '\n';
    out << r.separation << ' ' << r.l << ' ' << r.exit_code << ' ' << opt(r.b) << ' ' << diff << '\n';
  }

  // b nonincreasing in the separation for each l
  bool trend = true;
  std::map<int, std::vector<const SweepRow*>> by_l;
  for (const auto& r : rows)
    if (r.b) by_l[r.l].push_back(&r);
  for (auto& [l, v] : by_l) {
    std::sort(v.begin(), v.end(), [](auto* x, auto* y) { return x->separation < y->separation; });
    for (std::size_t q = 0; q + 1 < v.size(); ++q)
      if (*v[q + 1]->b > *v[q]->b + 1e-9) {
        trend = false;
        out << "WARN trend: l=" << l << " b rises from s=" << v[q]->separation << " to s=" << v[q + 1]->separation
            << '\n';
      }
  }
  // solutions with different markers are geometrically distinct
  bool distinct = true;
  for (std::size_t p = 0; p < rows.size(); ++p)
    for (std::size_t q = p + 1; q < rows.size(); ++q) {
      if (!rows[p].profile || !rows[q].profile || rows[p].separation == rows[q].separation) continue;
      const int span = std::max(rows[p].profile->window().size(), rows[q].profile->window().size());
      const double d = aligned_distance(*rows[p].profile, *rows[q].profile, span);
      if (!(d > 1e-3)) {
        distinct = false;
        out << "WARN distinct: s=" << rows[p].separation << " vs s=" << rows[q].separation << " aligned distance "
            << format_double(d) << '\n';
      }
    }
  out << "trend=" << (trend ? "ok" : "violated") << " distinct=" << (distinct ? "ok" : "violated")
      << " cells=" << cells.size() << '\n';
  return exit_code;
}

}  // namespace fkmt
