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

#include "saaet/subspace.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "saaet/error.h"
#include "saaet/rng.h"

namespace saaet {

ProjectionBasis::ProjectionBasis(Eigen::MatrixXd basis)
    : basis_(std::move(basis)) {
  Require(basis_.cols() > 0, "projection basis has zero dimension");
  projector_ = basis_.transpose() * basis_;
}

ProjectionBasis ProjectionBasis::FromProjector(
    const Eigen::MatrixXd& projector) {
  Require(projector.rows() == projector.cols() && projector.rows() > 0,
          "projector must be square");
  const Eigen::MatrixXd sym = 0.5 * (projector + projector.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()[i] > 0.5) keep.push_back(i);
  }
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(keep.size()),
                        projector.rows());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    basis.row(static_cast<Eigen::Index>(r)) =
        eig.eigenvectors().col(keep[r]).transpose();
  }
  ProjectionBasis pb;
  pb.basis_ = std::move(basis);
  pb.projector_ = projector;
  return pb;
}

SemanticCorpus SampleCorpus(const std::vector<Caption>& all_texts,
                            double proportion, std::uint64_t seed) {
  Require(!all_texts.empty(), "empty text pool");
  Require(proportion > 0.0 && proportion <= 1.0,
          "corpus proportion must lie in (0, 1]");
  const std::size_t m = all_texts.size();
  // The small epsilon keeps e.g. 0.4 * 10 at 4 instead of ceil(4.000...1).
  auto n = static_cast<std::size_t>(
      std::ceil(proportion * static_cast<double>(m) - 1e-9));
  n = std::clamp<std::size_t>(n, 1, m);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, {0x636f72707573ULL}));
  // Partial Fisher-Yates: the first n slots are a uniform n-subset.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, m - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));

  SemanticCorpus corpus;
  corpus.source_size = m;
  corpus.proportion = static_cast<double>(n) / static_cast<double>(m);
  corpus.texts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) corpus.texts.push_back(all_texts[order[i]]);
  return corpus;
}

ProjectionBasis BuildProjection(const Eigen::MatrixXd& corpus_embeddings) {
  Require(corpus_embeddings.rows() >= 1 && corpus_embeddings.cols() >= 1,
          "corpus embedding matrix is empty");
  Require(corpus_embeddings.allFinite(), "corpus embeddings must be finite");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(corpus_embeddings,
                                        Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma[0] <= 0.0) {
    Fail(ErrorCode::kDegenerateCorpus, "corpus embeddings are all zero");
  }
  const double cutoff = kRelativeSingularCutoff * sigma[0];
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > cutoff) ++rank;
  // Right-singular vectors span the row space, i.e. the text-embedding span.
  Eigen::MatrixXd basis = svd.matrixV().leftCols(rank).transpose();
  return ProjectionBasis(std::move(basis));
}

Embedding ProjectEmbedding(const Embedding& v, const ProjectionBasis& pb) {
  Require(v.size() == pb.dim(), "embedding dimension does not match projector");
  return pb.projector() * v;
}

double ProjectedSimilarityLoss(const Embedding& img_emb,
                               const Embedding& txt_emb,
                               const ProjectionBasis& pb) {
  Require(img_emb.size() == txt_emb.size(), "embedding dimension mismatch");
  return SimilarityLoss(ProjectEmbedding(img_emb, pb),
                        ProjectEmbedding(txt_emb, pb));
}

}  // namespace saaet
