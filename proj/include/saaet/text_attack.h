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

#ifndef SAAET_TEXT_ATTACK_H_
#define SAAET_TEXT_ATTACK_H_

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "saaet/core.h"
#include "saaet/encoders.h"
#include "saaet/subspace.h"

namespace saaet {

// Substitution candidates for each caption position.
struct WordCandidateList {
  std::vector<std::vector<int>> per_position;
};

// For every position, the word_list_size vocabulary tokens with the largest
// embedding dot product with the original token, the token itself excluded.
// Ties go to the lower token id.
WordCandidateList BuildWordCandidates(const Caption& caption,
                                      const BagOfWordsTextEncoder& encoder,
                                      int word_list_size);

// The original caption first, then every single-position substitution in
// (position, candidate) order. Only eps_T = 1 is supported.
std::vector<Caption> EnumerateTextCandidates(const Caption& caption,
                                             const WordCandidateList& wcl,
                                             int eps_T);

// Throws kInvalidArgument unless kappa, mu, nu are non-negative, sum to one
// and mu + nu > 0.
void ValidateTextWeights(double kappa, double mu, double nu);

// kappa * L(x, c) + mu * L(x~^{T-1}, c) + nu * L(x~^T, c) with L the
// adversarial loss (negated, optionally projected, similarity).
double ScoreTextCandidate(const Caption& candidate, const ImageTensor& clean,
                          const ImageTensor& prev_adv,
                          const ImageTensor& cur_adv, const EncoderPair& model,
                          const ProjectionBasis* projector,
                          const AttackConfig& cfg);

// Same objective with the three image embeddings folded into one vector, so
// each candidate costs a single text encoding.
class TextObjective {
 public:
  TextObjective(const ImageTensor& clean, const ImageTensor& prev_adv,
                const ImageTensor& cur_adv, const EncoderPair& model,
                const ProjectionBasis* projector, const AttackConfig& cfg);

  double operator()(const Caption& candidate) const;

 private:
  const EncoderPair* model_;
  const ProjectionBasis* projector_;
  Eigen::VectorXd combined_;
};

// Index of the highest-scoring candidate. Exact ties prefer the candidate
// equal to `original`, then the lowest index.
int SelectAdversarialText(const std::vector<Caption>& candidates,
                          const std::function<double(const Caption&)>& scorer,
                          const Caption& original);

struct TextAttackResult {
  Caption adversarial;
  bool substituted = false;
  double score = 0.0;
  double original_score = 0.0;
};

TextAttackResult RunTextAttack(const ImageTensor& clean,
                               const ImageTensor& prev_adv,
                               const ImageTensor& cur_adv,
                               const Caption& caption,
                               const EncoderPair& model,
                               const ProjectionBasis* projector,
                               const AttackConfig& cfg);

}  // namespace saaet

#endif  // SAAET_TEXT_ATTACK_H_
