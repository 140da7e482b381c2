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

#include "saaet/text_attack.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "saaet/error.h"

namespace saaet {

WordCandidateList BuildWordCandidates(const Caption& caption,
                                      const BagOfWordsTextEncoder& encoder,
                                      int word_list_size) {
  const int vocab = encoder.vocab_size();
  Require(word_list_size >= 0, "word list size must be non-negative");
  Require(word_list_size <= vocab - 1,
          "word list size exceeds the vocabulary minus the original token");
  WordCandidateList wcl;
  wcl.per_position.reserve(caption.length());
  for (int token : caption.tokens) {
    Require(token >= 0 && token < vocab,
            "token " + std::to_string(token) + " outside vocabulary");
    const Eigen::VectorXd affinity =
        encoder.table * encoder.table.row(token).transpose();
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(vocab - 1));
    for (int v = 0; v < vocab; ++v) {
      if (v != token) order.push_back(v);
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return affinity[a] > affinity[b];
    });
    order.resize(static_cast<std::size_t>(word_list_size));
    wcl.per_position.push_back(std::move(order));
  }
  return wcl;
}

std::vector<Caption> EnumerateTextCandidates(const Caption& caption,
                                             const WordCandidateList& wcl,
                                             int eps_T) {
  if (eps_T != 1) {
    Fail(ErrorCode::kUnsupportedBudget,
         "only a text budget of 1 is supported, got " + std::to_string(eps_T));
  }
  Require(wcl.per_position.size() == caption.length(),
          "candidate list does not match caption length");
  std::vector<Caption> out{caption};
  for (std::size_t pos = 0; pos < caption.length(); ++pos) {
    for (int token : wcl.per_position[pos]) {
      if (token == caption.tokens[pos]) continue;
      Caption changed = caption;
      changed.tokens[pos] = token;
      out.push_back(std::move(changed));
    }
  }
  return out;
}

void ValidateTextWeights(double kappa, double mu, double nu) {
  Require(kappa >= 0.0 && mu >= 0.0 && nu >= 0.0,
          "kappa, mu, nu must be non-negative");
  Require(std::abs(kappa + mu + nu - 1.0) <= 1e-12,
          "kappa + mu + nu must equal 1");
  Require(mu + nu > 0.0, "adversarial image weight mu + nu must be positive");
}

double ScoreTextCandidate(const Caption& candidate, const ImageTensor& clean,
                          const ImageTensor& prev_adv,
                          const ImageTensor& cur_adv, const EncoderPair& model,
                          const ProjectionBasis* projector,
                          const AttackConfig& cfg) {
  ValidateTextWeights(cfg.kappa, cfg.mu, cfg.nu);
  double score = 0.0;
  if (cfg.kappa != 0.0) {
    score += cfg.kappa * -ModelSimilarity(model, clean, candidate, projector);
  }
  if (cfg.mu != 0.0) {
    score += cfg.mu * -ModelSimilarity(model, prev_adv, candidate, projector);
  }
  if (cfg.nu != 0.0) {
    score += cfg.nu * -ModelSimilarity(model, cur_adv, candidate, projector);
  }
  return score;
}

TextObjective::TextObjective(const ImageTensor& clean,
                             const ImageTensor& prev_adv,
                             const ImageTensor& cur_adv,
                             const EncoderPair& model,
                             const ProjectionBasis* projector,
                             const AttackConfig& cfg)
    : model_(&model), projector_(projector) {
  ValidateTextWeights(cfg.kappa, cfg.mu, cfg.nu);
  combined_ = cfg.kappa * model.image.Encode(clean) +
              cfg.mu * model.image.Encode(prev_adv) +
              cfg.nu * model.image.Encode(cur_adv);
  if (projector_) combined_ = ProjectEmbedding(combined_, *projector_);
}

double TextObjective::operator()(const Caption& candidate) const {
  const Embedding txt = model_->text.Encode(candidate);
  const Embedding t = projector_ ? ProjectEmbedding(txt, *projector_) : txt;
  return -combined_.dot(t) / static_cast<double>(combined_.size());
}

int SelectAdversarialText(const std::vector<Caption>& candidates,
                          const std::function<double(const Caption&)>& scorer,
                          const Caption& original) {
  Require(!candidates.empty(), "no text candidates");
  int best = -1;
  double best_score = 0.0;
  bool best_is_original = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double score = scorer(candidates[i]);
    const bool is_original = candidates[i] == original;
    if (best < 0 || score > best_score ||
        (score == best_score && is_original && !best_is_original)) {
      best = static_cast<int>(i);
      best_score = score;
      best_is_original = is_original;
    }
  }
  return best;
}

TextAttackResult RunTextAttack(const ImageTensor& clean,
                               const ImageTensor& prev_adv,
                               const ImageTensor& cur_adv,
                               const Caption& caption,
                               const EncoderPair& model,
                               const ProjectionBasis* projector,
                               const AttackConfig& cfg) {
  const WordCandidateList wcl =
      BuildWordCandidates(caption, model.text, cfg.word_list_size);
  const std::vector<Caption> candidates =
      EnumerateTextCandidates(caption, wcl, cfg.text_budget);
  const TextObjective objective(clean, prev_adv, cur_adv, model, projector,
                                cfg);
  const int chosen = SelectAdversarialText(
      candidates, [&](const Caption& c) { return objective(c); }, caption);

  TextAttackResult result;
  result.adversarial = candidates[static_cast<std::size_t>(chosen)];
  result.substituted = !(result.adversarial == caption);
  result.score = objective(result.adversarial);
  result.original_score = objective(caption);
  return result;
}

}  // namespace saaet
