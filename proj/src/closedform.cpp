#include "peplin/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace peplin::closedform {

namespace {

double quadratic_branch(double h, int N) { return std::pow(1.0 - h, 2 * N); }

Rate combine_branches(double huber, bool huber_defined, double quad) {
  Rate r;
  r.huber_branch_defined = huber_defined;
  if (!huber_defined) {
    r.value = 0.5 * quad;
    r.branch = ActiveBranch::Quadratic;
    return r;
  }
  r.value = 0.5 * std::max(huber, quad);
  double diff = huber - quad;
  double tol = 1e-12 * std::max({1.0, std::abs(huber), std::abs(quad)});
  if (std::abs(diff) <= tol) {
    r.branch = ActiveBranch::Both;
  } else {
    r.branch = diff > 0 ? ActiveBranch::Huber : ActiveBranch::Quadratic;
  }
  return r;
}

void check_mu(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw std::invalid_argument("closedform: mu must lie in [0, 1]");
  }
}

}  // namespace

double huber_branch(double mu, double h, int N) {
  check_mu(mu);
  if (h < 0.0) throw std::invalid_argument("huber_branch: h must be >= 0");
  if (mu == 0.0) return 1.0 / (2.0 * N * h + 1.0);
  if (1.0 - mu * h <= 0.0) {
    throw std::invalid_argument("huber_branch: undefined for (1 - mu h) <= 0");
  }
  // mu - 1 + (1 - mu h)^{-2N} written as mu + expm1(-2N log1p(-mu h)) to
  // survive small mu without cancellation.
  return mu / (mu + std::expm1(-2.0 * N * std::log1p(-mu * h)));
}

Rate rate_smooth_convex_detail(double mu_f, double h, int N) {
  check_mu(mu_f);
  const double quad = quadratic_branch(h, N);
  if (mu_f > 0.0 && 1.0 - mu_f * h <= 0.0) {
    return combine_branches(0.0, false, quad);
  }
  return combine_branches(huber_branch(mu_f, h, N), true, quad);
}

double rate_smooth_convex(double mu_f, double h, int N) {
  return rate_smooth_convex_detail(mu_f, h, N).value;
}

double solve_h0(double mu_g, int N) {
  if (!(mu_g > 0.0 && mu_g <= 1.0)) {
    throw std::invalid_argument("solve_h0: mu_g must lie in (0, 1]");
  }
  auto psi = [&](double t) {
    return (1.0 - mu_g) * std::pow(1.0 - mu_g * t, 2 * N + 1) - 1.0 + (2 * N + 1) * mu_g * t;
  };
  double lo = 0.0, hi = 1.0 / mu_g;
  // psi(0) = -mu_g < 0 and psi(1/mu_g) = 2N > 0; psi is increasing on the
  // bracket, so the positive root is unique.
  if (!(psi(lo) < 0.0 && psi(hi) > 0.0)) {
    throw std::runtime_error("solve_h0: no sign change on [0, 1/mu]");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-17 * (1.0 / mu_g); ++it) {
    double mid = 0.5 * (lo + hi);
    (psi(mid) < 0.0 ? lo : hi) = mid;
  }
  double root = 0.5 * (lo + hi);
  if (std::abs(psi(root)) > 1e-12) {
    throw std::runtime_error("solve_h0: bisection residual above 1e-12");
  }
  return root;
}

double composed_mstar(double mu_g, double mu_M, double h, int N) {
  check_mu(mu_g);
  check_mu(mu_M);
  if (mu_g == 0.0) return 1.0;  // classes merge; any scale attains the bound
  if (h <= 0.0) return 1.0;
  double h0 = solve_h0(mu_g, N);
  return std::clamp(std::sqrt(h0 / h), mu_M, 1.0);
}

Rate rate_composed_detail(double mu_g, double mu_M, double h, int N) {
  check_mu(mu_g);
  check_mu(mu_M);
  if (mu_g == 0.0) return rate_smooth_convex_detail(0.0, h, N);
  const double mstar = composed_mstar(mu_g, mu_M, h, N);
  const double quad = quadratic_branch(h, N);
  const double mu_eff = mu_g * mstar * mstar;
  if (1.0 - mu_eff * h <= 0.0) return combine_branches(0.0, false, quad);
  // mu_g M*^2 / (mu_g - 1 + (1 - mu_g M*^2 h)^{-2N}); the denominator keeps
  // the original mu_g.
  double denom = mu_g + std::expm1(-2.0 * N * std::log1p(-mu_eff * h));
  return combine_branches(mu_eff / denom, true, quad);
}

double rate_composed(double mu_g, double mu_M, double h, int N) {
  return rate_composed_detail(mu_g, mu_M, h, N).value;
}

double rate_quadratic(double mu, double L, double h, int N, double R) {
  if (!(0.0 <= mu && mu <= L) || L <= 0.0) {
    throw std::invalid_argument("rate_quadratic: need 0 <= mu <= L, L > 0");
  }
  double alpha = h > 0.0 ? 1.0 / (h * (2 * N + 1)) : 1.0;
  alpha = std::clamp(alpha, mu / L, 1.0);
  double inner = alpha * std::pow(1.0 - alpha * h, 2 * N);
  return 0.5 * L * R * R * std::max(inner, quadratic_branch(h, N));
}

namespace {

// Bisection for branch_equal(h) = 0 with branch1 guarded to 0 where the
// Huber branch is undefined. Bracket [1, right): branch2 vanishes at h = 1
// while branch1 is positive, and the order flips before h = 2.
double bisect_optimal_step(const std::function<double(double)>& branch1, int N) {
  auto diff = [&](double h) { return branch1(h) - quadratic_branch(h, N); };
  double lo = 1.0;
  double hi = 2.0;
  if (diff(lo) <= 0.0) {
    throw std::runtime_error("optimal_step: no crossing, branch1(1) <= 0");
  }
  // Walk the right endpoint down until the sign change is inside.
  while (diff(hi) > 0.0) {
    hi -= 1.0 / 64.0;
    if (hi <= lo) throw std::runtime_error("optimal_step: no crossing in (1, 2)");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    double mid = 0.5 * (lo + hi);
    (diff(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double optimal_step_plain(double mu_f, int N) {
  check_mu(mu_f);
  if (mu_f == 1.0) return 1.0;  // both branches coincide; their minimum is at h = 1
  auto branch1 = [&](double h) {
    if (mu_f > 0.0 && 1.0 - mu_f * h <= 0.0) return 0.0;
    return huber_branch(mu_f, h, N);
  };
  return bisect_optimal_step(branch1, N);
}

double optimal_step_composed(double mu_g, double mu_M, int N) {
  check_mu(mu_g);
  check_mu(mu_M);
  if (mu_g == 0.0) return optimal_step_plain(0.0, N);
  if (mu_g == 1.0 && mu_M == 1.0) return 1.0;
  const double h0 = solve_h0(mu_g, N);
  auto branch1 = [&](double h) {
    double beta = mu_g * std::clamp(h0 / h, mu_M * mu_M, 1.0);
    if (1.0 - beta * h <= 0.0) return 0.0;
    return beta / (mu_g + std::expm1(-2.0 * N * std::log1p(-beta * h)));
  };
  return bisect_optimal_step(branch1, N);
}

double HuberFunction::value(double x) const {
  double ax = std::abs(x);
  if (ax <= tau) return 0.5 * x * x;
  return 0.5 * mu * x * x + (1.0 - mu) * tau * ax - 0.5 * (1.0 - mu) * tau * tau;
}

double HuberFunction::grad(double x) const {
  double ax = std::abs(x);
  if (ax <= tau) return x;
  double s = x > 0 ? 1.0 : -1.0;
  return mu * x + (1.0 - mu) * tau * s;
}

HuberFunction worst_huber(double mu, double h, int N) {
  return HuberFunction{mu, huber_threshold(mu, h, N)};
}

GmTrace run_gm_on_huber(double mu, double h_eff, double scale, double step, int N, double x0) {
  HuberFunction f = worst_huber(mu, h_eff, N);
  GmTrace trace;
  double x = x0;
  trace.iterates.push_back(x);
  for (int i = 0; i < N; ++i) {
    x -= step * scale * f.grad(x);
    trace.iterates.push_back(x);
  }
  trace.final_gap = scale * f.value(x);  // min l = 0
  return trace;
}

GmTrace run_gm_on_quadratic(double step, int N, double x0) {
  GmTrace trace;
  double x = x0;
  trace.iterates.push_back(x);
  for (int i = 0; i < N; ++i) {
    x -= step * x;
    trace.iterates.push_back(x);
  }
  trace.final_gap = 0.5 * x * x;
  return trace;
}

LowerBound gm_composed_lower_bound(double mu_g, double mu_M, double h, int N) {
  LowerBound lb;
  lb.quadratic_gap = run_gm_on_quadratic(h, N, 1.0).final_gap;
  const double mstar = composed_mstar(mu_g, mu_M, h, N);
  const double m2 = mstar * mstar;
  if (mu_g * m2 * h < 1.0) {
    lb.huber_gap = run_gm_on_huber(mu_g, m2 * h, m2, h, N, 1.0).final_gap;
  } else {
    lb.huber_gap = 0.0;  // Huber branch undefined in this regime
  }
  lb.value = std::max(lb.huber_gap, lb.quadratic_gap);
  return lb;
}

}  // namespace peplin::closedform
