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

#include "saaet/theory.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "saaet/error.h"

namespace saaet {
namespace {

double RelativeError(double value, double reference) {
  const double scale = std::max(std::abs(value), std::abs(reference));
  return scale == 0.0 ? 0.0 : std::abs(value - reference) / scale;
}

void RequireWeight(double w, const char* name) {
  Require(w >= 0.0 && w <= 1.0, std::string(name) + " must lie in [0, 1]");
}

}  // namespace

void QuadraticLoss::Validate() const {
  Require(H.rows() == H.cols(), "Hessian must be square");
  Require(H.rows() == g.size(), "gradient and Hessian sizes differ");
  Require((H - H.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          "Hessian must be symmetric");
}

UpdateCoefficients ClosedFormCoefficients(int t, double beta, double gamma) {
  Require(t >= 2, "closed forms hold for t >= 2");
  RequireWeight(beta, "beta");
  RequireWeight(gamma, "gamma");
  const double tt = t;
  UpdateCoefficients k;
  k.t = t;
  k.a = 1.0;
  k.b = beta * (tt - 2.0) + gamma * (tt - 1.0);
  k.c = tt;
  k.d = (tt - 1.0) * (tt - 2.0) / 2.0 * beta + tt * (tt - 1.0) / 2.0 * gamma;
  k.e = 1.0;
  k.f = tt - 1.0;
  k.h = tt;
  k.l = tt * (tt - 1.0) / 2.0;
  return k;
}

namespace {

// (coefficient of g, coefficient of Hg).
struct Linear {
  double p = 0.0;
  double q = 0.0;
};

// Gradient and perturbation coefficient sequences for t = 0 .. t_max.
void RunRecursion(int t_max, double beta, double gamma,
                  std::vector<Linear>& grads, std::vector<Linear>& deltas) {
  grads.assign(static_cast<std::size_t>(t_max) + 1, Linear{});
  deltas.assign(static_cast<std::size_t>(t_max) + 1, Linear{});
  grads[1] = {1.0, 0.0};
  deltas[1] = {1.0, 0.0};
  for (int t = 2; t <= t_max; ++t) {
    const Linear& older = deltas[static_cast<std::size_t>(t - 2)];
    const Linear& newer = deltas[static_cast<std::size_t>(t - 1)];
    // g(x + v) = g + H v; H applied to (p g + q Hg) keeps only p Hg.
    const Linear grad{1.0, beta * older.p + gamma * newer.p};
    grads[static_cast<std::size_t>(t)] = grad;
    deltas[static_cast<std::size_t>(t)] = {newer.p + grad.p, newer.q + grad.q};
  }
}

}  // namespace

std::vector<UpdateCoefficients> SimulateLinearizedUpdates(int t_max,
                                                          double beta,
                                                          double gamma) {
  Require(t_max >= 2, "t_max must be at least 2");
  RequireWeight(beta, "beta");
  RequireWeight(gamma, "gamma");
  std::vector<Linear> grads, deltas, base_grads, base_deltas;
  RunRecursion(t_max, beta, gamma, grads, deltas);
  RunRecursion(t_max, 0.0, 1.0, base_grads, base_deltas);
  std::vector<UpdateCoefficients> out;
  out.reserve(static_cast<std::size_t>(t_max) - 1);
  for (int t = 2; t <= t_max; ++t) {
    const auto i = static_cast<std::size_t>(t);
    UpdateCoefficients k;
    k.t = t;
    k.a = grads[i].p;
    k.b = grads[i].q;
    k.c = deltas[i].p;
    k.d = deltas[i].q;
    k.e = base_grads[i].p;
    k.f = base_grads[i].q;
    k.h = base_deltas[i].p;
    k.l = base_deltas[i].q;
    out.push_back(k);
  }
  return out;
}

std::vector<Eigen::VectorXd> SimulateExactUpdates(const QuadraticLoss& ql,
                                                  int t_max, double beta,
                                                  double gamma, double eta) {
  ql.Validate();
  Require(t_max >= 1, "t_max must be at least 1");
  Require(eta >= 0.0, "eta must be non-negative");
  std::vector<Eigen::VectorXd> deltas;
  deltas.reserve(static_cast<std::size_t>(t_max) + 1);
  deltas.push_back(Eigen::VectorXd::Zero(ql.g.size()));
  deltas.push_back(ql.g);
  for (int t = 2; t <= t_max; ++t) {
    const Eigen::VectorXd& older = deltas[static_cast<std::size_t>(t - 2)];
    const Eigen::VectorXd& newer = deltas[static_cast<std::size_t>(t - 1)];
    const Eigen::VectorXd grad =
        ql.g + eta * (ql.H * (beta * older + gamma * newer));
    deltas.push_back(newer + grad);
  }
  return deltas;
}

double LinearizationResidual(const QuadraticLoss& ql, int t, double beta,
                             double gamma, double eta) {
  Require(t >= 2, "residual is defined for t >= 2");
  const std::vector<Eigen::VectorXd> deltas =
      SimulateExactUpdates(ql, t, beta, gamma, eta);
  const UpdateCoefficients k = ClosedFormCoefficients(t, beta, gamma);
  const Eigen::VectorXd hg = eta * (ql.H * ql.g);
  return (deltas.back() - k.c * ql.g - k.d * hg).norm();
}

Eigen::MatrixXd ShapleyInteractionMatrix(const Eigen::VectorXd& delta,
                                         const Eigen::MatrixXd& H) {
  Require(H.rows() == H.cols() && H.rows() == delta.size(),
          "delta and Hessian sizes differ");
  return delta.asDiagonal() * H * delta.asDiagonal();
}

double ExpectedCrossInteraction(const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v,
                                const Eigen::MatrixXd& H) {
  const Eigen::Index n = u.size();
  Require(n >= 2, "expected interaction needs at least two units");
  Require(v.size() == n && H.rows() == n && H.cols() == n,
          "vector and Hessian sizes differ");
  const double all = u.dot(H * v);
  const double diagonal = (u.array() * H.diagonal().array() * v.array()).sum();
  return (all - diagonal) / static_cast<double>(n * (n - 1));
}

double ExpectedInteraction(const Eigen::VectorXd& delta,
                           const Eigen::MatrixXd& H) {
  return ExpectedCrossInteraction(delta, delta, H);
}

InteractionStats ComputeInteractionStats(const QuadraticLoss& ql) {
  ql.Validate();
  const Eigen::VectorXd hg = ql.H * ql.g;
  return InteractionStats{ExpectedCrossInteraction(ql.g, ql.g, ql.H),
                          ExpectedCrossInteraction(ql.g, hg, ql.H)};
}

double FirstOrderInteraction(const QuadraticLoss& ql, double c, double d) {
  const Eigen::VectorXd u = c * ql.g;
  const Eigen::VectorXd v = d * (ql.H * ql.g);
  return ExpectedCrossInteraction(u, u, ql.H) +
         ExpectedCrossInteraction(u, v, ql.H) +
         ExpectedCrossInteraction(v, u, ql.H);
}

TheoremReport VerifyTheorem(const QuadraticLoss& ql, double beta, double gamma,
                            int t_max) {
  Require(t_max >= 5, "t_max must be at least 5 for the cubic fit");
  ql.Validate();
  TheoremReport report;
  report.beta = beta;
  report.gamma = gamma;
  report.stats = ComputeInteractionStats(ql);
  const double A = report.stats.A;
  const double B = report.stats.B;
  const Eigen::VectorXd hg = ql.H * ql.g;

  std::vector<double> ts, proposed, sga;
  for (const UpdateCoefficients& k :
       SimulateLinearizedUpdates(t_max, beta, gamma)) {
    TheoremRow row;
    row.t = k.t;
    row.e_proposed = FirstOrderInteraction(ql, k.c, k.d);
    row.e_sga = FirstOrderInteraction(ql, k.h, k.l);
    row.gap = row.e_sga - row.e_proposed;
    row.full_proposed = ExpectedInteraction(k.c * ql.g + k.d * hg, ql.H);
    row.full_sga = ExpectedInteraction(k.h * ql.g + k.l * hg, ql.H);

    const double tt = k.t;
    report.identity_proposed_error =
        std::max(report.identity_proposed_error,
                 RelativeError(row.e_proposed, k.c * k.c * A + 2.0 * k.c * k.d * B));
    report.identity_sga_error =
        std::max(report.identity_sga_error,
                 RelativeError(row.e_sga, tt * tt * A + tt * tt * (tt - 1.0) * B));
    ts.push_back(tt);
    proposed.push_back(row.e_proposed);
    sga.push_back(row.e_sga);
    report.rows.push_back(row);
  }

  report.ordering_applicable = B > 0.0 && beta + gamma < 1.0;
  report.ordering_holds = true;
  report.gap_monotone = true;
  double previous_gap = 0.0;
  for (const TheoremRow& row : report.rows) {
    if (row.t < 3) continue;
    if (!(row.e_proposed < row.e_sga)) report.ordering_holds = false;
    if (row.gap < 0.0 || (row.t > 3 && row.gap < previous_gap)) {
      report.gap_monotone = false;
    }
    previous_gap = row.gap;
  }

  report.cubic_proposed = FitPolynomial(ts, proposed, 3)[3];
  report.cubic_sga = FitPolynomial(ts, sga, 3)[3];
  const double want_proposed = (beta + gamma) * B;
  report.cubic_proposed_error =
      want_proposed == 0.0 ? std::abs(report.cubic_proposed)
                           : RelativeError(report.cubic_proposed, want_proposed);
  report.cubic_sga_error =
      B == 0.0 ? std::abs(report.cubic_sga)
               : RelativeError(report.cubic_sga, B);

  report.stated_polynomial = {A + 2.0 * beta * B,
                              2.0 * A - (beta + gamma) * B,
                              A - 2.0 * beta * B, (beta + gamma) * B};
  report.derived_polynomial = {0.0, 2.0 * beta * B,
                               A - 3.0 * beta * B - gamma * B,
                               (beta + gamma) * B};
  for (std::size_t i = 0; i < 4; ++i) {
    report.polynomial_difference[i] =
        report.stated_polynomial[i] - report.derived_polynomial[i];
  }

  report.passed = report.identity_proposed_error <= kIdentityTolerance &&
                  report.identity_sga_error <= kIdentityTolerance &&
                  report.cubic_proposed_error <= kCubicTolerance &&
                  report.cubic_sga_error <= kCubicTolerance &&
                  (!report.ordering_applicable ||
                   (report.ordering_holds && report.gap_monotone));
  return report;
}

std::vector<double> FitPolynomial(const std::vector<double>& xs,
                                  const std::vector<double>& ys, int degree) {
  Require(degree >= 0, "degree must be non-negative");
  Require(xs.size() == ys.size(), "x and y lengths differ");
  Require(xs.size() > static_cast<std::size_t>(degree),
          "not enough points for the requested degree");
  // Fit in x / max|x| for conditioning, then undo the scaling.
  double scale = 0.0;
  for (double x : xs) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) scale = 1.0;
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd V(n, degree + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = xs[static_cast<std::size_t>(i)] / scale;
    double power = 1.0;
    for (int k = 0; k <= degree; ++k) {
      V(i, k) = power;
      power *= u;
    }
    y[i] = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coef = V.colPivHouseholderQr().solve(y);
  std::vector<double> out(static_cast<std::size_t>(degree) + 1);
  for (int k = 0; k <= degree; ++k) {
    out[static_cast<std::size_t>(k)] = coef[k] / std::pow(scale, k);
  }
  return out;
}

double LogLogSlope(const std::vector<double>& xs,
                   const std::vector<double>& ys) {
  Require(xs.size() == ys.size() && xs.size() >= 2,
          "slope needs at least two matched points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Require(xs[i] > 0.0 && ys[i] > 0.0, "log-log slope needs positive data");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  return FitPolynomial(lx, ly, 1)[1];
}

QuadraticLoss RandomQuadraticLoss(int n, Rng& rng) {
  Require(n >= 2, "dimension must be at least 2");
  QuadraticLoss ql;
  ql.g.resize(n);
  for (int i = 0; i < n; ++i) ql.g[i] = StandardNormal(rng);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) M(i, j) = StandardNormal(rng);
  }
  const Eigen::MatrixXd H = M * M.transpose() / static_cast<double>(n);
  ql.H = 0.5 * (H + H.transpose());
  return ql;
}

QuadraticLoss RandomQuadraticLossWithPositiveB(int n, Rng& rng,
                                               int max_tries) {
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    QuadraticLoss ql = RandomQuadraticLoss(n, rng);
    if (ComputeInteractionStats(ql).B > 0.0) return ql;
  }
  Fail(ErrorCode::kInvalidArgument,
       "no instance with positive B found in " + std::to_string(max_tries) +
           " draws");
}

}  // namespace saaet
