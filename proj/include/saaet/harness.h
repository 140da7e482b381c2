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

#ifndef SAAET_HARNESS_H_
#define SAAET_HARNESS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "saaet/core.h"
#include "saaet/encoders.h"
#include "saaet/image_attack.h"
#include "saaet/subspace.h"
#include "saaet/text_attack.h"

namespace saaet {

// Every generation parameter of a synthetic dataset. The dataset itself is
// never stored: it is regenerated from this descriptor.
struct DatasetSpec {
  std::uint64_t seed = 0;
  int pairs = 100;
  int height = 16;
  int width = 16;
  int dim = 32;
  int vocab = 256;
  int caption_length = 5;
  int latent_dim = 8;
  int held_out = 50;
  // Standard deviation of the entries of the latent-to-pixel matrix.
  double image_contrast = 0.015;
  // Relative magnitude of the text-irrelevant image features of the base
  // encoder.
  double redundancy = 2.0;

  void Validate() const;
};

struct ImageCaptionPair {
  ImageTensor image;
  Caption caption;
};

struct SyntheticDataset {
  DatasetSpec spec;
  std::vector<ImageCaptionPair> pairs;
  std::vector<Caption> held_out_texts;

  // Generator state shared with model construction.
  Eigen::MatrixXd token_latents;   // V x k, rows of norm sqrt(k)
  Eigen::MatrixXd feature_basis;   // d x d orthogonal; first k columns
                                   // span the semantic directions
  Eigen::MatrixXd pixel_map;       // (H*W) x k
};

// Latent z on the sphere of radius sqrt(k); image = clamp(0.5 + G z);
// caption = the L tokens with the largest <u_v, z>, best first.
SyntheticDataset SynthDataset(const DatasetSpec& spec);

// Encoder pair that decodes the latent exactly, plus redundant image
// features orthogonal to every text embedding.
EncoderPair BaseEncoders(const SyntheticDataset& dataset);

struct PoolSpec {
  int size = 4;
  // Relative magnitude of per-model image weight noise that is invisible on
  // clean images.
  double manifold_noise = 0.5;
  // Same, restricted to the text-irrelevant feature directions.
  double redundant_noise = 6.0;
  // Relative magnitude of per-model token-table noise.
  double text_noise = 0.4;

  void Validate() const;
};

// Models "m0", "m1", ...: the base pair with independent perturbations,
// image rows re-centred.
std::vector<EncoderPair> BuildModelPool(const SyntheticDataset& dataset,
                                        const PoolSpec& pool);

enum class RetrievalDirection { kTextRetrieval, kImageRetrieval };

struct RetrievalResult {
  RetrievalDirection direction = RetrievalDirection::kTextRetrieval;
  std::vector<int> ranks;
};

// 1 + number of gallery items strictly more similar to the query than the
// true pair; ties favour the true pair.
int RetrievalRank(const Embedding& query, const std::vector<Embedding>& gallery,
                  std::size_t pair_index);

// Ranks of every image query against all captions (TR) or every caption
// query against all images (IR).
RetrievalResult EvaluateRetrieval(const EncoderPair& model,
                                  const std::vector<ImageTensor>& images,
                                  const std::vector<Caption>& captions,
                                  RetrievalDirection direction);

// Percentage of clean rank-1 queries whose adversarial rank exceeds 1.
// Throws kUndefinedAsr if no query has clean rank 1.
double AttackSuccessRate(const std::vector<int>& clean_ranks,
                         const std::vector<int>& adv_ranks);

// Percentage of queries ranked first.
double RecallAt1(const std::vector<int>& ranks);

// Loss of an adversarial pair on `model`: the drop in similarity from the
// clean pair, J(x, c) - J(x~, c~). Zero for the clean pair itself.
double AlphaLoss(const EncoderPair& model, const ImageCaptionPair& clean,
                 const ImageTensor& adv_image, const Caption& adv_caption);

// AlphaLoss of the surrogate-crafted pair over AlphaLoss of the
// target-crafted pair, both on the target. Throws kDegenerateAlpha when the
// denominator is zero.
double AlphaMetric(const EncoderPair& target, const ImageCaptionPair& clean,
                   const ImageTensor& surrogate_image,
                   const Caption& surrogate_caption,
                   const ImageTensor& target_image,
                   const Caption& target_caption);

struct AttackVariant {
  std::string name;
  bool triangle = true;       // evolution-triangle image attack
  bool projection = true;     // semantic subspace projection
  bool triangle_text = true;  // kappa/mu/nu text objective (else 0/0/1)
  SubTriangle region = SubTriangle::kA;
};

// "sga", "dra", "saaet" or "subtriangle-X" with X in A..F.
AttackVariant VariantByName(const std::string& name);

struct AdversarialPair {
  ImageAttackResult image;
  TextAttackResult text;
};

// Image attack then text attack of one pair on one surrogate.
AdversarialPair AttackPair(const ImageCaptionPair& pair,
                           const EncoderPair& model,
                           const ProjectionBasis* projector,
                           const AttackVariant& variant,
                           const AttackConfig& cfg, Rng& rng);

// Projector of `model` built from its embeddings of a seeded corpus sample.
ProjectionBasis ModelProjection(const SyntheticDataset& dataset,
                                const EncoderPair& model,
                                const AttackConfig& cfg);

// Attacks every pair of the dataset on one surrogate. Pair p draws from the
// stream DeriveSeed(cfg.master_seed, {p}), so results do not depend on the
// surrogate's position in the pool or on `jobs`. Variants with projection use
// `projector` when given, else ModelProjection.
std::vector<AdversarialPair> AttackDataset(
    const SyntheticDataset& dataset, const EncoderPair& model,
    const AttackVariant& variant, const AttackConfig& cfg, int jobs,
    const ProjectionBasis* projector = nullptr);

struct ExperimentReport {
  std::string surrogate;
  std::string target;
  double tr_asr = 0.0;
  double ir_asr = 0.0;
  double alpha_mean = 0.0;
  std::uint64_t seed = 0;
  std::string variant;  // not serialized

  double asr() const { return 0.5 * (tr_asr + ir_asr); }
};

// One report per ordered (surrogate, target) pair, surrogate-major.
std::vector<ExperimentReport> RunTransferExperiment(
    const SyntheticDataset& dataset, const std::vector<EncoderPair>& pool,
    const AttackVariant& variant, const AttackConfig& cfg, int jobs = 1);

// Mean ASR over the cells with surrogate != target / surrogate == target.
double MeanTransferAsr(const std::vector<ExperimentReport>& reports);
double MinWhiteBoxAsr(const std::vector<ExperimentReport>& reports);
double MeanTransferAlpha(const std::vector<ExperimentReport>& reports);

inline constexpr const char* kReportHeader =
    "surrogate,target,tr_asr,ir_asr,alpha_mean,seed";

void WriteReport(const std::vector<ExperimentReport>& reports,
                 std::ostream& out);
// Throws kIo if the file cannot be written.
void WriteReport(const std::vector<ExperimentReport>& reports,
                 const std::string& path);
std::vector<ExperimentReport> ReadReport(std::istream& in);
std::vector<ExperimentReport> ReadReport(const std::string& path);

}  // namespace saaet

#endif  // SAAET_HARNESS_H_
