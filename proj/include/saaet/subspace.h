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

#ifndef SAAET_SUBSPACE_H_
#define SAAET_SUBSPACE_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "saaet/core.h"

namespace saaet {

// Texts whose embeddings define the semantic subspace.
struct SemanticCorpus {
  std::vector<Caption> texts;
  std::size_t source_size = 0;
  double proportion = 0.0;
};

// Orthonormal basis of the span of the corpus text embeddings and the
// orthogonal projector onto it.
class ProjectionBasis {
 public:
  ProjectionBasis() = default;
  // `basis` holds orthonormal rows (rank x dim).
  explicit ProjectionBasis(Eigen::MatrixXd basis);

  // Wraps an externally supplied projector (e.g. read back from disk). The
  // basis is recovered from its eigen-decomposition.
  static ProjectionBasis FromProjector(const Eigen::MatrixXd& projector);

  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::MatrixXd& projector() const { return projector_; }
  Eigen::Index rank() const { return basis_.rows(); }
  Eigen::Index dim() const { return projector_.rows(); }

 private:
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd projector_;
};

// Singular values at or below this fraction of the largest are discarded.
inline constexpr double kRelativeSingularCutoff = 1e-10;

// Uniform sample of ceil(proportion * M) texts without replacement. The
// result depends only on the seed.
SemanticCorpus SampleCorpus(const std::vector<Caption>& all_texts,
                            double proportion, std::uint64_t seed);

// N x d matrix of corpus embeddings -> projector onto their row space.
// Throws kDegenerateCorpus if every singular value is zero.
ProjectionBasis BuildProjection(const Eigen::MatrixXd& corpus_embeddings);

Embedding ProjectEmbedding(const Embedding& v, const ProjectionBasis& pb);

// <P img, P txt> / d.
double ProjectedSimilarityLoss(const Embedding& img_emb,
                               const Embedding& txt_emb,
                               const ProjectionBasis& pb);

}  // namespace saaet

#endif  // SAAET_SUBSPACE_H_
