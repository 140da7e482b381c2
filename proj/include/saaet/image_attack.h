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

#ifndef SAAET_IMAGE_ATTACK_H_
#define SAAET_IMAGE_ATTACK_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "saaet/core.h"
#include "saaet/encoders.h"
#include "saaet/rng.h"
#include "saaet/subspace.h"

namespace saaet {

// Vertices of the current evolution triangle.
struct TrajectoryState {
  ImageTensor clean;
  ImageTensor prev;
  ImageTensor cur;
  int step = 0;
};

struct AttackTrace {
  // Entry i describes the update that produced iterate i + 1.
  std::vector<double> losses;
  std::vector<SimplexWeights> weights;
  std::vector<int> chosen_index;
  // x~^0 .. x~^T.
  std::vector<ImageTensor> iterates;
  ImageTensor final_image;
  std::uint64_t seed = 0;
};

// CSV with columns step,loss,lambda,beta,gamma,chosen_index.
void WriteTraceCsv(const AttackTrace& trace, std::ostream& out);

// The attack maximizes the image-text mismatch, i.e. the negated similarity
// -J of the (optionally projected) model.
double AdversarialLoss(const EncoderPair& model, const ImageTensor& x,
                       const Caption& caption,
                       const ProjectionBasis* projector);

// x~^0 = Pi(x + eps * N(0, 1)), then one multi-scale sign step to x~^1.
TrajectoryState InitAdversarial(const ImageTensor& x, const Caption& caption,
                                const EncoderPair& model,
                                const ProjectionBasis* projector,
                                const AttackConfig& cfg, Rng& rng);

// m barycentric triples uniform over the region of the simplex with the
// ordering of `region`: uniform simplex draws are sorted and the largest,
// middle and smallest weights assigned to the region's ranks.
std::vector<SimplexWeights> SampleSubTriangle(SubTriangle region, int m,
                                              Rng& rng);
inline std::vector<SimplexWeights> SampleSubTriangleA(int m, Rng& rng) {
  return SampleSubTriangle(SubTriangle::kA, m, rng);
}

// alpha * sign(normalized gradient of the adversarial loss) at each sample
// s_k = lambda x + beta x_prev + gamma x_cur. sign(0) = 0.
std::vector<Eigen::VectorXd> CandidateDirections(
    const TrajectoryState& state, const std::vector<SimplexWeights>& weights,
    const Caption& caption, const EncoderPair& model,
    const ProjectionBasis* projector, const AttackConfig& cfg);

// Index of the direction whose projected step from the current iterate has
// the largest adversarial loss; ties go to the lowest index.
int TextGuidedSelect(const TrajectoryState& state,
                     const std::vector<Eigen::VectorXd>& directions,
                     const Caption& caption, const EncoderPair& model,
                     const ProjectionBasis* projector, const AttackConfig& cfg);

// Multi-scale sign step: the gradient of the adversarial loss summed over the
// scale set is taken at `chosen_sample` and applied to the current iterate.
TrajectoryState AttackStep(const TrajectoryState& state,
                           const ImageTensor& chosen_sample,
                           const Caption& caption, const EncoderPair& model,
                           const ProjectionBasis* projector,
                           const AttackConfig& cfg);

struct ImageAttackOptions {
  // When set, every iteration uses this single triple instead of sampling.
  std::optional<SimplexWeights> fixed_weights;
};

struct ImageAttackResult {
  ImageTensor adversarial;  // x~^T
  ImageTensor previous;     // x~^{T-1}
  AttackTrace trace;
};

// Evolution-triangle attack: init, then T - 1 rounds of
// sample -> directions -> text-guided selection -> multi-scale step.
ImageAttackResult RunImageAttack(const ImageTensor& x, const Caption& caption,
                                 const EncoderPair& model,
                                 const ProjectionBasis* projector,
                                 const AttackConfig& cfg, Rng& rng,
                                 const ImageAttackOptions& options = {});

// Set-level baseline: T multi-scale sign steps from the noisy start, each
// taking its gradient at the current iterate.
ImageAttackResult RunSgaImageAttack(const ImageTensor& x,
                                    const Caption& caption,
                                    const EncoderPair& model,
                                    const ProjectionBasis* projector,
                                    const AttackConfig& cfg, Rng& rng);

}  // namespace saaet

#endif  // SAAET_IMAGE_ATTACK_H_
