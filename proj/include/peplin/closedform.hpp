#pragma once

// Analytic worst-case rates of the gradient method, the piecewise
// quadratic/linear worst-case functions attaining them, and optimal step
// sizes. Everything is normalized to L_g = L_f = L_M = R = 1 except where a
// parameter says otherwise.

#include <vector>

namespace peplin::closedform {

enum class ActiveBranch { Huber, Quadratic, Both };

struct Rate {
  double value = 0.0;
  ActiveBranch branch = ActiveBranch::Both;
  bool huber_branch_defined = true;  // false when (1 - mu h) <= 0
};

// mu / (mu - 1 + (1 - mu h)^{-2N}), evaluated stably; the mu -> 0 limit is
// 1 / (2 N h + 1). This is both twice the Huber-branch rate and the Huber
// threshold tau_{mu,h}.
double huber_branch(double mu, double h, int N);
inline double huber_threshold(double mu, double h, int N) { return huber_branch(mu, h, N); }

// Worst case of N gradient steps with step size h on 1-smooth mu-strongly
// convex functions: (1/2) max{ huber_branch, (1-h)^{2N} }.
Rate rate_smooth_convex_detail(double mu_f, double h, int N);
double rate_smooth_convex(double mu_f, double h, int N);

// Positive root of (1 - mu)(1 - mu h0)^{2N+1} = 1 - (2N+1) mu h0 in
// (0, 1/mu]; bisection to machine precision. Requires 0 < mu <= 1.
double solve_h0(double mu_g, int N);

// Scale of the worst operator, proj_{[mu_M, 1]} sqrt(h0 / h).
double composed_mstar(double mu_g, double mu_M, double h, int N);

// Worst case on the composed class g(Mx) with g 1-smooth mu_g-strongly
// convex and sigma(M) in [mu_M, 1] (symmetric, or mu_M = 0 general):
// (1/2) max{ mu_g M*^2 / (mu_g - 1 + (1 - mu_g M*^2 h)^{-2N}), (1-h)^{2N} }.
Rate rate_composed_detail(double mu_g, double mu_M, double h, int N);
double rate_composed(double mu_g, double mu_M, double h, int N);

// Worst case on homogeneous quadratics with spectrum in [mu, L]:
// (L R^2 / 2) max{ alpha (1 - alpha h)^{2N}, (1-h)^{2N} },
// alpha = proj_{[mu/L, 1]} (1 / (h (2N+1))).
double rate_quadratic(double mu, double L, double h, int N, double R);

// Step size in (0, 2) equating the two branches of the rate; bisection on
// the bracket [1, min(2, 1/mu)).
double optimal_step_plain(double mu_f, int N);
double optimal_step_composed(double mu_g, double mu_M, int N);

// ---------------------------------------------------------------------------
// Explicit one-dimensional worst-case instances
// ---------------------------------------------------------------------------

// Quadratic-on-the-inside, linear-growth-on-the-outside function with kink
// at |x| = tau; 1-smooth and mu-strongly convex.
struct HuberFunction {
  double mu = 0.0;
  double tau = 0.0;
  double value(double x) const;
  double grad(double x) const;
};

// The worst-case function l_{mu,h} for N gradient steps (its tau depends on
// the step size and the horizon).
HuberFunction worst_huber(double mu, double h, int N);

struct GmTrace {
  std::vector<double> iterates;
  double final_gap = 0.0;
};

// Runs x_{k+1} = x_k - step * F'(x_k) on F = scale * l_{mu, h_eff} from x0.
GmTrace run_gm_on_huber(double mu, double h_eff, double scale, double step, int N, double x0);
// Same on q(x) = x^2 / 2.
GmTrace run_gm_on_quadratic(double step, int N, double x0);

struct LowerBound {
  double huber_gap = 0.0;      // gap achieved by M*^2 l_{mu_g, M*^2 h}
  double quadratic_gap = 0.0;  // gap achieved by q
  double value = 0.0;          // max of the two
};

// Numeric lower-bound oracle: runs the method on both candidate worst
// functions of the composed class (mu_M = 1 recovers the plain class).
LowerBound gm_composed_lower_bound(double mu_g, double mu_M, double h, int N);

}  // namespace peplin::closedform
