#pragma once

// Local stencil potentials s on the l1-ball B_0^r of Z^n, the built-in
// Frenkel-Kontorova families, and sampled checks of the structural hypotheses
// (shift periodicity, twist condition, gradient consistency).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fkmt/errors.hpp"

namespace fkmt {

/// Enumeration of the offsets k in Z^n with |k|_1 <= r.
///
/// Offsets are stored in lexicographic order of their coordinates. Stencil
/// assignments passed to a potential are indexed by position in `offsets`.
struct StencilIndex {
  int n = 0;
  int r = 0;
  std::vector<std::vector<int>> offsets;

  static StencilIndex ball(int n, int r) {
    if (n < 1 || r < 1) throw InvalidArgument("stencil needs n >= 1 and r >= 1");
    StencilIndex idx;
    idx.n = n;
    idx.r = r;
    std::vector<int> k(static_cast<std::size_t>(n), -r);
    for (;;) {
      int norm = 0;
      for (int c : k) norm += std::abs(c);
      if (norm <= r) idx.offsets.push_back(k);
      // odometer increment
      int d = n - 1;
      while (d >= 0 && k[static_cast<std::size_t>(d)] == r) {
        k[static_cast<std::size_t>(d)] = -r;
        --d;
      }
      if (d < 0) break;
      ++k[static_cast<std::size_t>(d)];
    }
    return idx;
  }

  [[nodiscard]] std::size_t size() const { return offsets.size(); }

  [[nodiscard]] static int norm1(const std::vector<int>& k) {
    int s = 0;
    for (int c : k) s += std::abs(c);
    return s;
  }

  [[nodiscard]] std::size_t center() const {
    for (std::size_t i = 0; i < offsets.size(); ++i)
      if (norm1(offsets[i]) == 0) return i;
    throw InvalidArgument("stencil has no zero offset");
  }

  /// First (longitudinal) coordinate of each offset. Configurations that are
  /// 1-periodic in the transverse directions only see this component.
  [[nodiscard]] std::vector<int> longitudinal() const {
    std::vector<int> lon;
    lon.reserve(offsets.size());
    for (const auto& k : offsets) lon.push_back(k.front());
    return lon;
  }

  /// |{k in Z^n : |k|_1 <= r}| = sum_j 2^j C(n,j) C(r,j).
  [[nodiscard]] static std::size_t ball_count(int n, int r) {
    auto binom = [](int a, int b) {
      double c = 1.0;
      for (int i = 1; i <= b; ++i) c = c * (a - b + i) / i;
      return static_cast<std::size_t>(std::llround(c));
    };
    std::size_t total = 0;
    for (int j = 0; j <= std::min(n, r); ++j)
      total += (std::size_t{1} << j) * binom(n, j) * binom(r, j);
    return total;
  }
};

using StencilEval = std::function<double(std::span<const double>)>;
using StencilGrad = std::function<void(std::span<const double>, std::span<double>)>;

/// A C^2 local potential s on R^{B_0^r} together with its partials d_k s.
struct StencilPotential {
  std::string kind;
  StencilIndex stencil;
  std::map<std::string, double> params;
  StencilEval eval;
  StencilGrad grad;

  [[nodiscard]] int n() const { return stencil.n; }
  [[nodiscard]] int r() const { return stencil.r; }
};

namespace detail {

// Assemble s = V(u(0)) + (1/8n) sum_{|k|=1} (u(k) - u(0))^2 from V and V'.
inline StencilPotential make_fk_form(std::string kind, int n, std::function<double(double)> V,
                                     std::function<double(double)> dV) {
  StencilPotential p;
  p.kind = std::move(kind);
  p.stencil = StencilIndex::ball(n, 1);
  const std::size_t c = p.stencil.center();
  const double coupling = 1.0 / (8.0 * n);
  p.eval = [c, coupling, V](std::span<const double> a) {
    double e = V(a[c]);
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (k == c) continue;
      const double d = a[k] - a[c];
      e += coupling * d * d;
    }
    return e;
  };
  p.grad = [c, coupling, dV](std::span<const double> a, std::span<double> g) {
    double gc = dV(a[c]);
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (k == c) continue;
      const double d = 2.0 * coupling * (a[k] - a[c]);
      g[k] = d;
      gc -= d;
    }
    g[c] = gc;
  };
  return p;
}

}  // namespace detail

/// FK example with V(x) = lambda (1 - cos 2 pi x) / (2 pi)^2, minimal exactly at the integers.
inline StencilPotential make_fk_example(int n, double lambda) {
  if (n < 2) throw InvalidArgument("make_fk_example: n must be >= 2");
  if (!(lambda > 0.0)) throw InvalidArgument("make_fk_example: lambda must be > 0");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto V = [lambda](double x) { return lambda * (1.0 - std::cos(two_pi * x)) / (two_pi * two_pi); };
  auto dV = [lambda](double x) { return lambda * std::sin(two_pi * x) / two_pi; };
  auto p = detail::make_fk_form("fk_cosine", n, V, dV);
  p.params = {{"lambda", lambda}, {"n", static_cast<double>(n)}};
  return p;
}

/// Two-well variant V(x) = lambda sin^2(2 pi x) / (2 pi)^2, minimal at x in Z/2.
inline StencilPotential make_fk_two_well(int n, double lambda) {
  if (n < 2) throw InvalidArgument("make_fk_two_well: n must be >= 2");
  if (!(lambda > 0.0)) throw InvalidArgument("make_fk_two_well: lambda must be > 0");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto V = [lambda](double x) {
    const double s = std::sin(two_pi * x);
    return lambda * s * s / (two_pi * two_pi);
  };
  // d/dx sin^2(2 pi x) = 2 pi sin(4 pi x)
  auto dV = [lambda](double x) { return lambda * std::sin(2.0 * two_pi * x) / two_pi; };
  auto p = detail::make_fk_form("fk_two_well", n, V, dV);
  p.params = {{"lambda", lambda}, {"n", static_cast<double>(n)}};
  return p;
}

/// FK-form potential whose on-site term is the trigonometric interpolant of
/// `table`, sampled at x = j / N over one period.
inline StencilPotential make_fk_table(int n, std::vector<double> table) {
  if (n < 2) throw InvalidArgument("make_fk_table: n must be >= 2");
  if (table.empty()) throw InvalidArgument("make_fk_table: empty table");
  for (double y : table)
    if (!std::isfinite(y)) throw InvalidArgument("make_fk_table: non-finite table entry");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const std::size_t N = table.size();
  const std::size_t half = (N - 1) / 2;
  std::vector<double> ca(half + 1, 0.0), sb(half + 1, 0.0);
  for (std::size_t j = 0; j < N; ++j) ca[0] += table[j];
  ca[0] /= static_cast<double>(N);
  for (std::size_t m = 1; m <= half; ++m) {
    for (std::size_t j = 0; j < N; ++j) {
      const double t = two_pi * static_cast<double>((m * j) % N) / static_cast<double>(N);
      ca[m] += table[j] * std::cos(t);
      sb[m] += table[j] * std::sin(t);
    }
    ca[m] *= 2.0 / static_cast<double>(N);
    sb[m] *= 2.0 / static_cast<double>(N);
  }
  double nyquist = 0.0;
  if (N % 2 == 0) {
    for (std::size_t j = 0; j < N; ++j) nyquist += (j % 2 == 0 ? 1.0 : -1.0) * table[j];
    nyquist /= static_cast<double>(N);
  }
  const double fN = static_cast<double>(N);
  auto V = [ca, sb, nyquist, fN, half](double x) {
    x -= std::floor(x);
    double v = ca[0];
    for (std::size_t m = 1; m <= half; ++m) {
      const double t = two_pi * static_cast<double>(m) * x;
      v += ca[m] * std::cos(t) + sb[m] * std::sin(t);
    }
    if (nyquist != 0.0) v += nyquist * std::cos(std::numbers::pi * fN * x);
    return v;
  };
  auto dV = [ca, sb, nyquist, fN, half](double x) {
    x -= std::floor(x);
    double d = 0.0;
    for (std::size_t m = 1; m <= half; ++m) {
      const double w = two_pi * static_cast<double>(m);
      d += w * (-ca[m] * std::sin(w * x) + sb[m] * std::cos(w * x));
    }
    if (nyquist != 0.0) d -= nyquist * std::numbers::pi * fN * std::sin(std::numbers::pi * fN * x);
    return d;
  };
  auto p = detail::make_fk_form("user_table", n, V, dV);
  p.params = {{"n", static_cast<double>(n)}, {"table_size", fN}};
  return p;
}

/// s + c for a constant c.
inline StencilPotential shifted(StencilPotential p, double c) {
  auto e = p.eval;
  p.eval = [e, c](std::span<const double> a) { return e(a) + c; };
  p.params["offset"] += c;
  return p;
}

struct HypothesisCheck {
  std::string name;
  bool pass = true;
  double worst = 0.0;  // worst-case violation magnitude (0 when never violated)
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;

  [[nodiscard]] bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }
  [[nodiscard]] const HypothesisCheck& get(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw InvalidArgument("no hypothesis check named " + name);
  }
};

struct HypothesisOptions {
  double periodicity_tol = 1e-12;
  // Central-difference floor below which a mixed partial counts as zero.
  double mixed_noise = 1e-8;
  double gradient_rel_tol = 1e-6;
  double fd_step = 1e-5;
  double mixed_step = 1e-4;
};

/// Samples stencil assignments uniformly from [-2, 2] and records the worst
/// violation of each hypothesis.
///
/// Checked items: "S1" (shift periodicity), "S3" (d_{k,j}s <= 0 for k != j),
/// "S3_strict" (d_{0,j}s < 0 for |j|_1 = 1) and "gradient" (grad against central
/// differences of eval). Coercivity is a limit statement and is not sampled.
inline HypothesisReport check_hypotheses(const StencilPotential& p, int samples, std::uint64_t seed,
                                         const HypothesisOptions& opt = {}) {
  if (samples < 1) throw InvalidArgument("check_hypotheses: samples must be >= 1");
  const std::size_t m = p.stencil.size();
  const std::size_t c = p.stencil.center();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);

  HypothesisCheck s1{"S1"}, s3{"S3"}, s3s{"S3_strict"}, gr{"gradient"};
  double worst_strict = -std::numeric_limits<double>::infinity();

  std::vector<double> a(m), b(m), g(m), gp(m), gm(m);
  for (int s = 0; s < samples; ++s) {
    for (auto& x : a) x = dist(rng);

    for (std::size_t k = 0; k < m; ++k) b[k] = a[k] + 1.0;
    s1.worst = std::max(s1.worst, std::abs(p.eval(b) - p.eval(a)));

    p.grad(a, g);
    for (std::size_t k = 0; k < m; ++k) {
      b = a;
      b[k] = a[k] + opt.fd_step;
      const double fp = p.eval(b);
      b[k] = a[k] - opt.fd_step;
      const double fm = p.eval(b);
      const double fd = (fp - fm) / (2.0 * opt.fd_step);
      gr.worst = std::max(gr.worst, std::abs(g[k] - fd) / std::max(1.0, std::abs(g[k])));
    }

    for (std::size_t j = 0; j < m; ++j) {
      b = a;
      b[j] = a[j] + opt.mixed_step;
      p.grad(b, gp);
      b[j] = a[j] - opt.mixed_step;
      p.grad(b, gm);
      for (std::size_t k = 0; k < m; ++k) {
        if (k == j) continue;
        const double mixed = (gp[k] - gm[k]) / (2.0 * opt.mixed_step);
        if (mixed > opt.mixed_noise) s3.worst = std::max(s3.worst, mixed);
        if (k == c && StencilIndex::norm1(p.stencil.offsets[j]) == 1)
          worst_strict = std::max(worst_strict, mixed);
      }
    }
  }
  s1.pass = s1.worst <= opt.periodicity_tol;
  s3.pass = s3.worst == 0.0;
  // strict negativity: the largest sampled d_{0,j}s must sit below the noise floor
  s3s.worst = std::max(0.0, worst_strict + opt.mixed_noise);
  s3s.pass = worst_strict < -opt.mixed_noise;
  gr.pass = gr.worst <= opt.gradient_rel_tol;
  return HypothesisReport{{s1, s3, s3s, gr}};
}

}  // namespace fkmt
