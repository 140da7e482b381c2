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

#include "saaet/encoders.h"

#include <string>

#include "saaet/error.h"

namespace saaet {

Embedding LinearImageEncoder::Encode(const ImageTensor& x) const {
  return EncodePixels(x.pixels());
}

Embedding LinearImageEncoder::EncodePixels(const Eigen::VectorXd& pixels) const {
  Require(pixels.size() == weight.cols(),
          "image has " + std::to_string(pixels.size()) +
              " pixels but encoder expects " + std::to_string(weight.cols()));
  return weight * pixels;
}

Embedding BagOfWordsTextEncoder::Encode(const Caption& c) const {
  Require(c.length() >= 1, "caption is empty");
  Embedding sum = Embedding::Zero(table.cols());
  for (int token : c.tokens) {
    Require(token >= 0 && token < table.rows(),
            "token " + std::to_string(token) + " outside vocabulary");
    sum += table.row(token).transpose();
  }
  return sum / static_cast<double>(c.length());
}

void EncoderPair::Validate() const {
  Require(image.weight.rows() == text.table.cols(),
          "image and text encoders disagree on embedding dimension");
  Require(image.weight.allFinite() && text.table.allFinite(),
          "encoder weights must be finite");
}

double ModelSimilarity(const EncoderPair& model, const ImageTensor& x,
                       const Caption& c, const ProjectionBasis* projector) {
  const Embedding img = model.image.Encode(x);
  const Embedding txt = model.text.Encode(c);
  return projector ? ProjectedSimilarityLoss(img, txt, *projector)
                   : SimilarityLoss(img, txt);
}

Eigen::VectorXd GradLossWrtImage(const LinearImageEncoder& enc_i,
                                 const BagOfWordsTextEncoder& enc_t,
                                 const ImageTensor& x, const Caption& c,
                                 double scale,
                                 const ProjectionBasis* projector) {
  Require(enc_i.weight.cols() == static_cast<Eigen::Index>(x.size()),
          "image does not match encoder input size");
  Require(enc_i.dim() == enc_t.dim(), "encoder dimension mismatch");
  Embedding txt = enc_t.Encode(c);
  if (projector) {
    // P is symmetric and idempotent, so <P a, P b> = <a, P b>.
    txt = ProjectEmbedding(txt, *projector);
  }
  const Eigen::VectorXd cotangent =
      enc_i.weight.transpose() * (txt / static_cast<double>(enc_i.dim()));
  const ScaleAugment augment(x.height(), x.width(), scale);
  return augment.ApplyTranspose(cotangent);
}

Eigen::VectorXd FiniteDifferenceGrad(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x, double step) {
  Require(step > 0.0, "finite-difference step must be positive");
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = fn(probe);
    probe[i] = x[i] - step;
    const double down = fn(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace saaet
