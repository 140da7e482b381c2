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

#include "saaet/image_attack.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>

#include "saaet/error.h"

namespace saaet {
namespace {

// sign(v / ||v||). Dividing by the norm never flips a sign, but the step is
// written as in the update rule; a zero gradient yields a zero step.
Eigen::VectorXd NormalizedSign(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  Eigen::VectorXd unit = norm > 0.0 ? Eigen::VectorXd(v / norm) : v;
  return unit.unaryExpr([](double e) {
    return e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
  });
}

// Gradient of the adversarial loss -J summed over the augmentation scales.
Eigen::VectorXd MultiScaleAdversarialGradient(const ImageTensor& sample,
                                              const Caption& caption,
                                              const EncoderPair& model,
                                              const ProjectionBasis* projector,
                                              const std::vector<double>& scales) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(sample.size()));
  for (double scale : scales) {
    total -= GradLossWrtImage(model.image, model.text, sample, caption, scale,
                              projector);
  }
  return total;
}

ImageTensor NoisyStart(const ImageTensor& x, const AttackConfig& cfg,
                       Rng& rng) {
  Eigen::VectorXd noisy = x.pixels();
  for (Eigen::Index i = 0; i < noisy.size(); ++i) {
    noisy[i] += cfg.eps_image * StandardNormal(rng);
  }
  return LinfProjectPixels(noisy, x, cfg.eps_image);
}

const SimplexWeights kCurrentIterate{0.0, 0.0, 1.0};

}  // namespace

void WriteTraceCsv(const AttackTrace& trace, std::ostream& out) {
  out << "step,loss,lambda,beta,gamma,chosen_index\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < trace.losses.size(); ++i) {
    const SimplexWeights& w = trace.weights[i];
    out << (i + 1) << ',' << trace.losses[i] << ',' << w.lambda << ','
        << w.beta << ',' << w.gamma << ',' << trace.chosen_index[i] << '\n';
  }
}

double AdversarialLoss(const EncoderPair& model, const ImageTensor& x,
                       const Caption& caption,
                       const ProjectionBasis* projector) {
  return -ModelSimilarity(model, x, caption, projector);
}

TrajectoryState InitAdversarial(const ImageTensor& x, const Caption& caption,
                                const EncoderPair& model,
                                const ProjectionBasis* projector,
                                const AttackConfig& cfg, Rng& rng) {
  cfg.Validate();
  const ImageTensor start = NoisyStart(x, cfg, rng);
  const TrajectoryState origin{x, start, start, 0};
  return AttackStep(origin, start, caption, model, projector, cfg);
}

std::vector<SimplexWeights> SampleSubTriangle(SubTriangle region, int m,
                                              Rng& rng) {
  Require(m >= 1, "sample count must be at least 1");
  std::vector<SimplexWeights> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    // Normalized unit exponentials are uniform on the simplex.
    std::array<double, 3> e{};
    for (double& v : e) v = -std::log(1.0 - Uniform01(rng));
    const double sum = e[0] + e[1] + e[2];
    for (double& v : e) v /= sum;
    std::sort(e.begin(), e.end());
    const double lo = e[0], mid = e[1], hi = e[2];
    switch (region) {
      case SubTriangle::kA:  // gamma < beta < lambda
        out.push_back(SimplexWeights::Make(hi, mid, lo));
        break;
      case SubTriangle::kB:  // gamma < lambda < beta
        out.push_back(SimplexWeights::Make(mid, hi, lo));
        break;
      case SubTriangle::kC:  // lambda < gamma < beta
        out.push_back(SimplexWeights::Make(lo, hi, mid));
        break;
      case SubTriangle::kD:  // lambda < beta < gamma
        out.push_back(SimplexWeights::Make(lo, mid, hi));
        break;
      case SubTriangle::kE:  // beta < lambda < gamma
        out.push_back(SimplexWeights::Make(mid, lo, hi));
        break;
      case SubTriangle::kF:  // beta < gamma < lambda
        out.push_back(SimplexWeights::Make(hi, lo, mid));
        break;
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> CandidateDirections(
    const TrajectoryState& state, const std::vector<SimplexWeights>& weights,
    const Caption& caption, const EncoderPair& model,
    const ProjectionBasis* projector, const AttackConfig& cfg) {
  Require(!weights.empty(), "no triangle samples");
  std::vector<Eigen::VectorXd> directions;
  directions.reserve(weights.size());
  for (const SimplexWeights& w : weights) {
    const ImageTensor sample =
        ConvexCombine(state.clean, state.prev, state.cur, w);
    const Eigen::VectorXd grad = -GradLossWrtImage(
        model.image, model.text, sample, caption, 1.0, projector);
    directions.push_back(cfg.alpha * NormalizedSign(grad));
  }
  return directions;
}

int TextGuidedSelect(const TrajectoryState& state,
                     const std::vector<Eigen::VectorXd>& directions,
                     const Caption& caption, const EncoderPair& model,
                     const ProjectionBasis* projector, const AttackConfig& cfg) {
  Require(!directions.empty(), "no candidate directions");
  int best = 0;
  double best_loss = 0.0;
  for (std::size_t k = 0; k < directions.size(); ++k) {
    const ImageTensor moved = LinfProjectPixels(
        state.cur.pixels() + directions[k], state.clean, cfg.eps_image);
    const double loss = AdversarialLoss(model, moved, caption, projector);
    if (k == 0 || loss > best_loss) {
      best = static_cast<int>(k);
      best_loss = loss;
    }
  }
  return best;
}

TrajectoryState AttackStep(const TrajectoryState& state,
                           const ImageTensor& chosen_sample,
                           const Caption& caption, const EncoderPair& model,
                           const ProjectionBasis* projector,
                           const AttackConfig& cfg) {
  const Eigen::VectorXd grad = MultiScaleAdversarialGradient(
      chosen_sample, caption, model, projector, cfg.scales);
  const Eigen::VectorXd step = cfg.alpha * NormalizedSign(grad);
  ImageTensor next =
      LinfProjectPixels(state.cur.pixels() + step, state.clean, cfg.eps_image);
  return TrajectoryState{state.clean, state.cur, std::move(next),
                         state.step + 1};
}

ImageAttackResult RunImageAttack(const ImageTensor& x, const Caption& caption,
                                 const EncoderPair& model,
                                 const ProjectionBasis* projector,
                                 const AttackConfig& cfg, Rng& rng,
                                 const ImageAttackOptions& options) {
  TrajectoryState state =
      InitAdversarial(x, caption, model, projector, cfg, rng);

  AttackTrace trace;
  trace.seed = cfg.master_seed;
  trace.iterates = {state.prev, state.cur};
  trace.losses.push_back(AdversarialLoss(model, state.cur, caption, projector));
  trace.weights.push_back(kCurrentIterate);
  trace.chosen_index.push_back(0);

  for (int i = 1; i < cfg.steps; ++i) {
    const std::vector<SimplexWeights> weights =
        options.fixed_weights
            ? std::vector<SimplexWeights>(static_cast<std::size_t>(cfg.samples),
                                          *options.fixed_weights)
            : SampleSubTriangle(cfg.region, cfg.samples, rng);
    const std::vector<Eigen::VectorXd> directions = CandidateDirections(
        state, weights, caption, model, projector, cfg);
    const int chosen =
        TextGuidedSelect(state, directions, caption, model, projector, cfg);
    const SimplexWeights& w = weights[static_cast<std::size_t>(chosen)];
    const ImageTensor sample =
        ConvexCombine(state.clean, state.prev, state.cur, w);
    state = AttackStep(state, sample, caption, model, projector, cfg);

    trace.iterates.push_back(state.cur);
    trace.losses.push_back(
        AdversarialLoss(model, state.cur, caption, projector));
    trace.weights.push_back(w);
    trace.chosen_index.push_back(chosen);
  }
  trace.final_image = state.cur;
  return ImageAttackResult{state.cur, state.prev, std::move(trace)};
}

ImageAttackResult RunSgaImageAttack(const ImageTensor& x,
                                    const Caption& caption,
                                    const EncoderPair& model,
                                    const ProjectionBasis* projector,
                                    const AttackConfig& cfg, Rng& rng) {
  cfg.Validate();
  AttackTrace trace;
  trace.seed = cfg.master_seed;
  ImageTensor prev = NoisyStart(x, cfg, rng);
  ImageTensor cur = prev;
  trace.iterates.push_back(cur);
  for (int i = 0; i < cfg.steps; ++i) {
    Eigen::VectorXd grad =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cur.size()));
    for (double scale : cfg.scales) {
      grad -= GradLossWrtImage(model.image, model.text, cur, caption, scale,
                               projector);
    }
    prev = cur;
    cur = LinfProjectPixels(cur.pixels() + cfg.alpha * NormalizedSign(grad), x,
                            cfg.eps_image);
    trace.iterates.push_back(cur);
    trace.losses.push_back(AdversarialLoss(model, cur, caption, projector));
    trace.weights.push_back(kCurrentIterate);
    trace.chosen_index.push_back(0);
  }
  trace.final_image = cur;
  return ImageAttackResult{cur, prev, std::move(trace)};
}

}  // namespace saaet
