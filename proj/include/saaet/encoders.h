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

#ifndef SAAET_ENCODERS_H_
#define SAAET_ENCODERS_H_

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "saaet/core.h"
#include "saaet/subspace.h"

namespace saaet {

// F_I(x) = weight * flatten(x); weight is d x (H*W).
struct LinearImageEncoder {
  Eigen::MatrixXd weight;
  std::string model_id;

  Eigen::Index dim() const { return weight.rows(); }
  Embedding Encode(const ImageTensor& x) const;
  // Same map on an unconstrained pixel vector (augmented or perturbed).
  Embedding EncodePixels(const Eigen::VectorXd& pixels) const;
};

// F_T(c) = mean of the embedding rows of the caption's tokens; table is V x d.
struct BagOfWordsTextEncoder {
  Eigen::MatrixXd table;
  std::string model_id;

  Eigen::Index dim() const { return table.cols(); }
  int vocab_size() const { return static_cast<int>(table.rows()); }
  Embedding Encode(const Caption& c) const;
};

// One toy vision-language model.
struct EncoderPair {
  LinearImageEncoder image;
  BagOfWordsTextEncoder text;

  const std::string& id() const { return image.model_id; }
  void Validate() const;
};

// Similarity of the model on (x, c), through the semantic projector when one
// is supplied.
double ModelSimilarity(const EncoderPair& model, const ImageTensor& x,
                       const Caption& c, const ProjectionBasis* projector);

// Exact gradient with respect to x of J(scale_augment(x, scale), c):
// augment^T * weight^T * (P * F_T(c)) / d, with P = I when projector is null.
Eigen::VectorXd GradLossWrtImage(const LinearImageEncoder& enc_i,
                                 const BagOfWordsTextEncoder& enc_t,
                                 const ImageTensor& x, const Caption& c,
                                 double scale,
                                 const ProjectionBasis* projector);

// Central differences with the given step, one pixel at a time.
Eigen::VectorXd FiniteDifferenceGrad(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x, double step = 1e-5);

}  // namespace saaet

#endif  // SAAET_ENCODERS_H_
