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
#include <set>

#include "gtest/gtest.h"
#include "saaet/error.h"
#include "test_util.h"

namespace saaet {
namespace {

using ::saaet::testing::RandomMatrix;
using ::saaet::testing::RandomVector;

std::vector<Caption> NumberedTexts(int m) {
  std::vector<Caption> texts;
  for (int i = 0; i < m; ++i) texts.push_back(Caption{{i}});
  return texts;
}

TEST(SampleCorpusTest, FullProportionTakesEverything) {
  const auto texts = NumberedTexts(12);
  const SemanticCorpus corpus = SampleCorpus(texts, 1.0, 3);
  EXPECT_EQ(corpus.texts, texts);
  EXPECT_EQ(corpus.source_size, 12u);
}

TEST(SampleCorpusTest, FortyPercentOfTen) {
  const SemanticCorpus corpus = SampleCorpus(NumberedTexts(10), 0.4, 3);
  EXPECT_EQ(corpus.texts.size(), 4u);
  std::set<int> distinct;
  for (const Caption& c : corpus.texts) distinct.insert(c.tokens[0]);
  EXPECT_EQ(distinct.size(), 4u);
}

TEST(SampleCorpusTest, CeilingOfFractionalCount) {
  EXPECT_EQ(SampleCorpus(NumberedTexts(7), 0.5, 1).texts.size(), 4u);
  EXPECT_EQ(SampleCorpus(NumberedTexts(7), 0.01, 1).texts.size(), 1u);
}

TEST(SampleCorpusTest, DeterministicPerSeed) {
  const auto texts = NumberedTexts(40);
  EXPECT_EQ(SampleCorpus(texts, 0.4, 9).texts, SampleCorpus(texts, 0.4, 9).texts);
  EXPECT_NE(SampleCorpus(texts, 0.4, 9).texts, SampleCorpus(texts, 0.4, 10).texts);
}

TEST(SampleCorpusTest, Errors) {
  EXPECT_THROW(SampleCorpus({}, 0.4, 1), Error);
  EXPECT_THROW(SampleCorpus(NumberedTexts(5), 0.0, 1), Error);
  EXPECT_THROW(SampleCorpus(NumberedTexts(5), 1.2, 1), Error);
}

// Uniformity: over many seeds every text is picked about p of the time.
TEST(SampleCorpusTest, InclusionFrequencyIsUniform) {
  const auto texts = NumberedTexts(10);
  std::vector<int> hits(10, 0);
  const int runs = 20000;
  for (int s = 0; s < runs; ++s) {
    for (const Caption& c : SampleCorpus(texts, 0.4, s).texts) ++hits[c.tokens[0]];
  }
  for (int h : hits) EXPECT_NEAR(h / static_cast<double>(runs), 0.4, 0.02);
}

TEST(BuildProjectionTest, FullSpanIsIdentity) {
  const ProjectionBasis pb = BuildProjection(Eigen::Matrix2d::Identity());
  EXPECT_EQ(pb.rank(), 2);
  EXPECT_LT((pb.projector() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(BuildProjectionTest, RankOneOuterProduct) {
  Eigen::MatrixXd row(1, 2);
  row << 3, 4;
  const ProjectionBasis pb = BuildProjection(row);
  Eigen::Matrix2d want;
  want << 0.36, 0.48, 0.48, 0.64;
  EXPECT_EQ(pb.rank(), 1);
  EXPECT_LT((pb.projector() - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildProjectionTest, ProjectorProperties) {
  Rng rng(5);
  const Eigen::MatrixXd t = RandomMatrix(5, 8, rng);
  const ProjectionBasis pb = BuildProjection(t);
  const Eigen::MatrixXd& P = pb.projector();
  EXPECT_EQ(pb.rank(), 5);
  EXPECT_LT((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((P * P - P).cwiseAbs().maxCoeff(), 1e-9);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd ti = t.row(i).transpose();
    EXPECT_LT((P * ti - ti).cwiseAbs().maxCoeff(), 1e-9);
  }
  const Eigen::MatrixXd& U = pb.basis();
  EXPECT_LT((U * U.transpose() - Eigen::MatrixXd::Identity(5, 5))
                .cwiseAbs()
                .maxCoeff(),
            1e-9);
}

TEST(BuildProjectionTest, RankCountsSingularValuesAboveCutoff) {
  Rng rng(6);
  // Three independent directions, each repeated with a scale.
  const Eigen::MatrixXd base = RandomMatrix(3, 10, rng);
  Eigen::MatrixXd t(6, 10);
  t << base, 2.0 * base;
  EXPECT_EQ(BuildProjection(t).rank(), 3);
}

TEST(BuildProjectionTest, AllZeroCorpusIsDegenerate) {
  try {
    BuildProjection(Eigen::MatrixXd::Zero(4, 6));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateCorpus);
  }
}

TEST(ProjectEmbeddingTest, FixedPointsAndKernel) {
  Eigen::MatrixXd t(2, 3);
  t << 1, 0, 0, 0, 1, 0;
  const ProjectionBasis pb = BuildProjection(t);
  EXPECT_LT((ProjectEmbedding(Eigen::Vector3d(2, -1, 0), pb) -
             Eigen::Vector3d(2, -1, 0)).norm(),
            1e-9);
  EXPECT_LT(ProjectEmbedding(Eigen::Vector3d(0, 0, 5), pb).norm(), 1e-9);
  EXPECT_THROW(ProjectEmbedding(Eigen::Vector2d(1, 1), pb), Error);
}

TEST(ProjectEmbeddingTest, MatchesMatVecAndIsIdempotent) {
  Rng rng(7);
  const ProjectionBasis pb = BuildProjection(RandomMatrix(4, 9, rng));
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd v = RandomVector(9, rng);
    const Embedding once = ProjectEmbedding(v, pb);
    EXPECT_LT((once - pb.projector() * v).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((ProjectEmbedding(once, pb) - once).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ProjectedSimilarityLossTest, IdentityProjectorEqualsPlainLoss) {
  Rng rng(8);
  const ProjectionBasis pb = BuildProjection(Eigen::MatrixXd::Identity(6, 6));
  const Eigen::VectorXd u = RandomVector(6, rng);
  const Eigen::VectorXd v = RandomVector(6, rng);
  EXPECT_NEAR(ProjectedSimilarityLoss(u, v, pb), SimilarityLoss(u, v), 1e-15);
}

TEST(ProjectedSimilarityLossTest, KernelGivesZero) {
  Eigen::MatrixXd t(1, 3);
  t << 1, 0, 0;
  const ProjectionBasis pb = BuildProjection(t);
  EXPECT_NEAR(ProjectedSimilarityLoss(Eigen::Vector3d(1, 2, 3),
                                      Eigen::Vector3d(0, 4, -1), pb),
              0.0, 1e-15);
}

TEST(ProjectedSimilarityLossTest, ComposeThenDotAndSelfAdjointness) {
  Rng rng(9);
  const ProjectionBasis pb = BuildProjection(RandomMatrix(3, 7, rng));
  const Eigen::MatrixXd& P = pb.projector();
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd u = RandomVector(7, rng);
    const Eigen::VectorXd v = RandomVector(7, rng);
    const double value = ProjectedSimilarityLoss(u, v, pb);
    EXPECT_NEAR(value, (P * u).dot(P * v) / 7.0, 1e-12);
    EXPECT_NEAR(value, ProjectedSimilarityLoss(P * u, v, pb), 1e-9);
    EXPECT_NEAR(value, SimilarityLoss(P * u, P * v), 1e-9);
  }
}

TEST(ProjectionBasisTest, FromProjectorRecoversRankAndProjector) {
  Rng rng(10);
  const ProjectionBasis pb = BuildProjection(RandomMatrix(4, 10, rng));
  const ProjectionBasis back = ProjectionBasis::FromProjector(pb.projector());
  EXPECT_EQ(back.rank(), 4);
  EXPECT_LT((back.projector() - pb.projector()).cwiseAbs().maxCoeff(), 1e-9);
}

}  // namespace
}  // namespace saaet
