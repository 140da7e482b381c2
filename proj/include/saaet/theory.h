/*
 * Copyright 2026 The saaet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SAAET_THEORY_H_
#define SAAET_THEORY_H_

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "saaet/rng.h"

namespace saaet {

// Second-order model of a loss around x: gradient g and symmetric Hessian H.
struct QuadraticLoss {
  Eigen::VectorXd g;
  Eigen::MatrixXd H;

  // Throws kInvalidArgument on mismatched sizes or asymmetry above 1e-12.
  void Validate() const;
};

// Linearized coefficients at step t: the gradient g_t = a g + b Hg and the
// perturbation delta_t = c g + d Hg of the triangle update, and h_t = e g +
// f Hg, zeta_t = h g + l Hg of the set-level baseline.
struct UpdateCoefficients {
  int t = 0;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double e = 0.0, f = 0.0, h = 0.0, l = 0.0;
};

// Closed forms for t >= 2. Throws kInvalidArgument for t < 2 or weights
// outside [0, 1].
UpdateCoefficients ClosedFormCoefficients(int t, double beta, double gamma);

// Runs the coefficient recursion symbolically on (coef of g, coef of Hg),
// dropping every H^2 term. The baseline columns use beta = 0, gamma = 1.
// Returns entries for t = 2 .. t_max.
std::vector<UpdateCoefficients> SimulateLinearizedUpdates(int t_max,
                                                          double beta,
                                                          double gamma);

// delta_0 .. delta_{t_max} of the update on the quadratic loss whose
// gradient at x + delta is g + (eta H) delta.
std::vector<Eigen::VectorXd> SimulateExactUpdates(const QuadraticLoss& ql,
                                                  int t_max, double beta,
                                                  double gamma, double eta);

// || delta_t - c_t g - d_t (eta H) g || for the exact simulation.
double LinearizationResidual(const QuadraticLoss& ql, int t, double beta,
                             double gamma, double eta);

// I_ij = delta(i) H_ij delta(j).
Eigen::MatrixXd ShapleyInteractionMatrix(const Eigen::VectorXd& delta,
                                         const Eigen::MatrixXd& H);

// Mean of I_ij over ordered pairs i != j. Throws kInvalidArgument if n < 2.
double ExpectedInteraction(const Eigen::VectorXd& delta,
                           const Eigen::MatrixXd& H);

// Mean of u(i) H_ij v(j) over ordered pairs i != j.
double ExpectedCrossInteraction(const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v,
                                const Eigen::MatrixXd& H);

// A = E[g(i) g(j) H_ij], B = E[g(i) H_ij (g^T H)_j] over ordered pairs i != j.
struct InteractionStats {
  double A = 0.0;
  double B = 0.0;
};
InteractionStats ComputeInteractionStats(const QuadraticLoss& ql);

// Expected interaction of c g + d Hg to first order in H: the term
// quadratic in d (of order H^3) is dropped.
double FirstOrderInteraction(const QuadraticLoss& ql, double c, double d);

struct TheoremRow {
  int t = 0;
  double e_proposed = 0.0;  // first-order E[I(delta_t)]
  double e_sga = 0.0;       // first-order E[I(zeta_t)]
  double gap = 0.0;         // e_sga - e_proposed
  double full_proposed = 0.0;  // E[I] of the linearized delta_t, no truncation
  double full_sga = 0.0;
};

// Polynomial coefficients are stored constant term first.
using Cubic = std::array<double, 4>;

struct TheoremReport {
  double beta = 0.0;
  double gamma = 0.0;
  InteractionStats stats;
  std::vector<TheoremRow> rows;  // t = 2 .. t_max

  double identity_proposed_error = 0.0;  // vs c^2 A + 2 c d B
  double identity_sga_error = 0.0;       // vs t^2 A + t^2 (t - 1) B
  bool ordering_applicable = false;      // B > 0 and beta + gamma < 1
  bool ordering_holds = false;           // strict, t >= 3
  bool gap_monotone = false;             // nonnegative and nondecreasing
  double cubic_proposed = 0.0;           // fitted t^3 coefficient
  double cubic_sga = 0.0;
  double cubic_proposed_error = 0.0;     // relative to (beta + gamma) B
  double cubic_sga_error = 0.0;          // relative to B

  // The stated form does not match the first-order expansion. Both are
  // reported along with their difference.
  Cubic stated_polynomial{};
  Cubic derived_polynomial{};
  Cubic polynomial_difference{};  // stated - derived

  bool passed = false;
};

inline constexpr double kIdentityTolerance = 1e-9;
inline constexpr double kCubicTolerance = 1e-6;

// Evaluates both expected interactions for t = 2 .. t_max (t_max >= 5) and
// checks the identities, ordering, gap monotonicity and leading growth.
TheoremReport VerifyTheorem(const QuadraticLoss& ql, double beta, double gamma,
                            int t_max);

// Least-squares polynomial fit; coefficients returned constant term first.
std::vector<double> FitPolynomial(const std::vector<double>& xs,
                                  const std::vector<double>& ys, int degree);

// Slope of the least-squares line through (log x, log y).
double LogLogSlope(const std::vector<double>& xs,
                   const std::vector<double>& ys);

// g ~ N(0, I), H = M M^T / n with M ~ N(0, 1): positive semidefinite.
QuadraticLoss RandomQuadraticLoss(int n, Rng& rng);

// Redraws until B > 0. Throws kInvalidArgument after max_tries failures.
QuadraticLoss RandomQuadraticLossWithPositiveB(int n, Rng& rng,
                                               int max_tries = 1000);

}  // namespace saaet

#endif  // SAAET_THEORY_H_
