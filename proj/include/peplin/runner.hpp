#pragma once

// High-level entry points: build a method trajectory, assemble, solve and
// rescale. Problems are normalized to R = 1 and L_F = 1 before solving and
// the optimal value is scaled back, so the solver always sees well
// conditioned data.

#include "peplin/sdp.hpp"

namespace peplin {

struct GmProblem {
  GmObjective objective;
  double h = 1.0;  // normalized step size; the method runs with step h / L_F
  int N = 1;
  double R = 1.0;
  Criterion criterion = Criterion::ObjectiveGapLast;
};

struct CpProblem {
  double tau = 1.0;
  double sigma = 1.0;
  int N = 1;
  double S_f = 1.0;  // subgradient bounds; kInf removes the bound
  double S_g = 1.0;
  double L_M = 1.0;
  double R_x = 1.0;
  double R_u = 1.0;
  Criterion criterion = Criterion::ObjectiveGapLast;
};

struct RunResult {
  SolveStatus status = SolveStatus::Inaccurate;
  double value = std::numeric_limits<double>::quiet_NaN();  // in original scale
  double scale = 1.0;      // multiplier applied to the solved value
  Trajectory traj;         // trajectory as solved (normalized data)
  PepProblem prob;
  SolveResult result;
  int best_index = -1;     // winning iterate for the best-iterate criterion
};

// Smoothness constant of the objective class (L_g * L_M^2 for composed).
double smoothness_constant(const GmObjective& objective);

RunResult solve_gm(const GmProblem& problem,
                   const conic::Backend& backend = conic::clarabel_backend(),
                   const conic::Settings& settings = {}, bool normalize = true);

RunResult solve_cp(const CpProblem& problem,
                   const conic::Backend& backend = conic::clarabel_backend(),
                   const conic::Settings& settings = {});

}  // namespace peplin
