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

#include "saaet/harness.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "saaet/error.h"
#include "saaet/rng.h"

namespace saaet {
namespace {

// Stream tags under the dataset seed.
constexpr std::uint64_t kTokenStream = 1;
constexpr std::uint64_t kBasisStream = 2;
constexpr std::uint64_t kPixelStream = 3;
constexpr std::uint64_t kPairStream = 4;
constexpr std::uint64_t kHeldOutStream = 5;
constexpr std::uint64_t kRedundancyStream = 6;
constexpr std::uint64_t kPoolStream = 7;
constexpr std::uint64_t kCorpusStream = 8;

Eigen::MatrixXd GaussianMatrix(Eigen::Index rows, Eigen::Index cols,
                               Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = StandardNormal(rng);
  }
  return m;
}

double Rms(const Eigen::MatrixXd& m) {
  return std::sqrt(m.squaredNorm() / static_cast<double>(m.size()));
}

void CenterRows(Eigen::MatrixXd& m) {
  m.colwise() -= m.rowwise().mean();
}

Caption TopTokens(const Eigen::MatrixXd& token_latents,
                  const Eigen::VectorXd& z, int length) {
  const Eigen::VectorXd score = token_latents * z;
  std::vector<int> order(static_cast<std::size_t>(score.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] > score[b]; });
  order.resize(static_cast<std::size_t>(length));
  return Caption{order};
}

// Pseudo-inverse of a full-column-rank matrix.
Eigen::MatrixXd LeftInverse(const Eigen::MatrixXd& g) {
  return (g.transpose() * g).ldlt().solve(g.transpose());
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first
// exception thrown by any worker is rethrown on the caller.
template <typename Fn>
void ParallelFor(std::size_t count, int jobs, Fn fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void DatasetSpec::Validate() const {
  Require(pairs >= 2, "a dataset needs at least 2 pairs");
  Require(height >= 1 && width >= 1, "image size must be positive");
  Require(latent_dim >= 1, "latent dimension must be positive");
  Require(dim > latent_dim, "embedding dimension must exceed latent dimension");
  Require(height * width >= latent_dim,
          "image must have at least latent_dim pixels");
  Require(caption_length >= 1, "caption length must be positive");
  Require(vocab > caption_length, "vocabulary must exceed caption length");
  Require(held_out >= 1, "held-out pool must be nonempty");
  Require(image_contrast > 0.0, "image contrast must be positive");
  Require(redundancy >= 0.0, "redundancy must be non-negative");
}

SyntheticDataset SynthDataset(const DatasetSpec& spec) {
  spec.Validate();
  SyntheticDataset ds;
  ds.spec = spec;
  const int k = spec.latent_dim;
  const int pixels = spec.height * spec.width;

  Rng token_rng = StreamRng(spec.seed, {kTokenStream});
  ds.token_latents = GaussianMatrix(spec.vocab, k, token_rng);
  ds.token_latents.rowwise().normalize();
  ds.token_latents *= std::sqrt(static_cast<double>(k));

  Rng basis_rng = StreamRng(spec.seed, {kBasisStream});
  ds.feature_basis = GaussianMatrix(spec.dim, spec.dim, basis_rng)
                         .householderQr()
                         .householderQ();

  Rng pixel_rng = StreamRng(spec.seed, {kPixelStream});
  ds.pixel_map = spec.image_contrast * GaussianMatrix(pixels, k, pixel_rng);

  Rng pair_rng = StreamRng(spec.seed, {kPairStream});
  const double radius = std::sqrt(static_cast<double>(k));
  for (int p = 0; p < spec.pairs; ++p) {
    Eigen::VectorXd z = GaussianMatrix(k, 1, pair_rng);
    z *= radius / z.norm();
    Eigen::VectorXd img =
        (ds.pixel_map * z).array() + 0.5;
    ds.pairs.push_back(
        {ImageTensor::Clamped(static_cast<std::size_t>(spec.height),
                              static_cast<std::size_t>(spec.width),
                              std::move(img)),
         TopTokens(ds.token_latents, z, spec.caption_length)});
  }

  Rng held_rng = StreamRng(spec.seed, {kHeldOutStream});
  for (int i = 0; i < spec.held_out; ++i) {
    const Eigen::VectorXd z = GaussianMatrix(k, 1, held_rng);
    ds.held_out_texts.push_back(
        TopTokens(ds.token_latents, z, spec.caption_length));
  }
  return ds;
}

EncoderPair BaseEncoders(const SyntheticDataset& dataset) {
  const DatasetSpec& spec = dataset.spec;
  const int k = spec.latent_dim;
  const Eigen::MatrixXd semantic = dataset.feature_basis.leftCols(k);
  const Eigen::MatrixXd redundant =
      dataset.feature_basis.rightCols(spec.dim - k);

  Eigen::MatrixXd weight = semantic * LeftInverse(dataset.pixel_map);
  Rng rng = StreamRng(spec.seed, {kRedundancyStream});
  const Eigen::MatrixXd noise =
      GaussianMatrix(spec.dim - k, weight.cols(), rng);
  weight += spec.redundancy * Rms(weight) * (redundant * noise);
  CenterRows(weight);

  EncoderPair base;
  base.image = {std::move(weight), "base"};
  base.text = {dataset.token_latents * semantic.transpose(), "base"};
  return base;
}

void PoolSpec::Validate() const {
  Require(size >= 1, "pool size must be positive");
  Require(manifold_noise >= 0.0 && redundant_noise >= 0.0 && text_noise >= 0.0,
          "noise magnitudes must be non-negative");
}

std::vector<EncoderPair> BuildModelPool(const SyntheticDataset& dataset,
                                        const PoolSpec& pool) {
  pool.Validate();
  const DatasetSpec& spec = dataset.spec;
  const EncoderPair base = BaseEncoders(dataset);
  const Eigen::MatrixXd redundant =
      dataset.feature_basis.rightCols(spec.dim - spec.latent_dim);
  // Projector onto the image manifold's tangent space (span of G).
  const Eigen::MatrixXd on_manifold =
      dataset.pixel_map * LeftInverse(dataset.pixel_map);
  const double image_scale = Rms(base.image.weight);
  const double text_scale = Rms(base.text.table);

  std::vector<EncoderPair> models;
  for (int i = 0; i < pool.size; ++i) {
    Rng rng = StreamRng(spec.seed, {kPoolStream, static_cast<std::uint64_t>(i)});
    const Eigen::Index rows = base.image.weight.rows();
    const Eigen::Index cols = base.image.weight.cols();
    Eigen::MatrixXd n1 = GaussianMatrix(rows, cols, rng);
    n1 -= n1 * on_manifold;
    Eigen::MatrixXd n2 = GaussianMatrix(rows, cols, rng);
    n2 -= n2 * on_manifold;
    n2 = redundant * (redundant.transpose() * n2);
    Eigen::MatrixXd weight = base.image.weight +
                             pool.manifold_noise * image_scale * n1 +
                             pool.redundant_noise * image_scale * n2;
    CenterRows(weight);
    Eigen::MatrixXd table =
        base.text.table +
        pool.text_noise * text_scale *
            GaussianMatrix(base.text.table.rows(), base.text.table.cols(), rng);

    const std::string id = "m" + std::to_string(i);
    EncoderPair model;
    model.image = {std::move(weight), id};
    model.text = {std::move(table), id};
    models.push_back(std::move(model));
  }
  return models;
}

int RetrievalRank(const Embedding& query, const std::vector<Embedding>& gallery,
                  std::size_t pair_index) {
  Require(!gallery.empty(), "gallery is empty");
  Require(pair_index < gallery.size(), "pair index outside gallery");
  const double truth = SimilarityLoss(query, gallery[pair_index]);
  int rank = 1;
  for (const Embedding& item : gallery) {
    if (SimilarityLoss(query, item) > truth) ++rank;
  }
  return rank;
}

RetrievalResult EvaluateRetrieval(const EncoderPair& model,
                                  const std::vector<ImageTensor>& images,
                                  const std::vector<Caption>& captions,
                                  RetrievalDirection direction) {
  Require(images.size() == captions.size() && !images.empty(),
          "images and captions must pair up");
  std::vector<Embedding> image_embs, text_embs;
  for (const ImageTensor& x : images) image_embs.push_back(model.image.Encode(x));
  for (const Caption& c : captions) text_embs.push_back(model.text.Encode(c));
  const bool tr = direction == RetrievalDirection::kTextRetrieval;
  const std::vector<Embedding>& queries = tr ? image_embs : text_embs;
  const std::vector<Embedding>& gallery = tr ? text_embs : image_embs;
  RetrievalResult result;
  result.direction = direction;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    result.ranks.push_back(RetrievalRank(queries[i], gallery, i));
  }
  return result;
}

double AttackSuccessRate(const std::vector<int>& clean_ranks,
                         const std::vector<int>& adv_ranks) {
  Require(clean_ranks.size() == adv_ranks.size(),
          "clean and adversarial rank lists differ in length");
  int eligible = 0;
  int fooled = 0;
  for (std::size_t i = 0; i < clean_ranks.size(); ++i) {
    if (clean_ranks[i] != 1) continue;
    ++eligible;
    if (adv_ranks[i] > 1) ++fooled;
  }
  if (eligible == 0) {
    Fail(ErrorCode::kUndefinedAsr, "no query is ranked first on clean data");
  }
  return 100.0 * fooled / eligible;
}

double RecallAt1(const std::vector<int>& ranks) {
  Require(!ranks.empty(), "no ranks");
  const auto hits = std::count(ranks.begin(), ranks.end(), 1);
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double AlphaLoss(const EncoderPair& model, const ImageCaptionPair& clean,
                 const ImageTensor& adv_image, const Caption& adv_caption) {
  return ModelSimilarity(model, clean.image, clean.caption, nullptr) -
         ModelSimilarity(model, adv_image, adv_caption, nullptr);
}

double AlphaMetric(const EncoderPair& target, const ImageCaptionPair& clean,
                   const ImageTensor& surrogate_image,
                   const Caption& surrogate_caption,
                   const ImageTensor& target_image,
                   const Caption& target_caption) {
  const double numerator =
      AlphaLoss(target, clean, surrogate_image, surrogate_caption);
  const double denominator =
      AlphaLoss(target, clean, target_image, target_caption);
  if (denominator == 0.0) {
    Fail(ErrorCode::kDegenerateAlpha,
         "target-crafted pair leaves the target loss unchanged");
  }
  return numerator / denominator;
}

AttackVariant VariantByName(const std::string& name) {
  if (name == "sga") return {"sga", false, false, false, SubTriangle::kA};
  if (name == "dra") return {"dra", true, false, true, SubTriangle::kA};
  if (name == "saaet") return {"saaet", true, true, true, SubTriangle::kA};
  const std::string prefix = "subtriangle-";
  if (name.size() == prefix.size() + 1 && name.compare(0, prefix.size(), prefix) == 0) {
    return {name, true, true, true, SubTriangleFromLetter(name.back())};
  }
  Fail(ErrorCode::kInvalidArgument, "unknown attack variant '" + name + "'");
}

AdversarialPair AttackPair(const ImageCaptionPair& pair,
                           const EncoderPair& model,
                           const ProjectionBasis* projector,
                           const AttackVariant& variant,
                           const AttackConfig& cfg, Rng& rng) {
  const ProjectionBasis* used = variant.projection ? projector : nullptr;
  Require(!variant.projection || projector != nullptr,
          "variant needs a semantic projector");
  AttackConfig run_cfg = cfg;
  run_cfg.region = variant.region;
  if (!variant.triangle_text) {
    run_cfg.kappa = 0.0;
    run_cfg.mu = 0.0;
    run_cfg.nu = 1.0;
  }
  AdversarialPair out;
  out.image = variant.triangle
                  ? RunImageAttack(pair.image, pair.caption, model, used,
                                   run_cfg, rng)
                  : RunSgaImageAttack(pair.image, pair.caption, model, used,
                                      run_cfg, rng);
  out.text = RunTextAttack(pair.image, out.image.previous,
                           out.image.adversarial, pair.caption, model, used,
                           run_cfg);
  return out;
}

ProjectionBasis ModelProjection(const SyntheticDataset& dataset,
                                const EncoderPair& model,
                                const AttackConfig& cfg) {
  const SemanticCorpus corpus =
      SampleCorpus(dataset.held_out_texts, cfg.corpus_proportion,
                   DeriveSeed(cfg.master_seed, {kCorpusStream}));
  Eigen::MatrixXd embeddings(static_cast<Eigen::Index>(corpus.texts.size()),
                             model.text.dim());
  for (std::size_t i = 0; i < corpus.texts.size(); ++i) {
    embeddings.row(static_cast<Eigen::Index>(i)) =
        model.text.Encode(corpus.texts[i]).transpose();
  }
  return BuildProjection(embeddings);
}

std::vector<AdversarialPair> AttackDataset(
    const SyntheticDataset& dataset, const EncoderPair& model,
    const AttackVariant& variant, const AttackConfig& cfg, int jobs,
    const ProjectionBasis* projector) {
  cfg.Validate();
  model.Validate();
  ProjectionBasis built;
  if (variant.projection && projector == nullptr) {
    built = ModelProjection(dataset, model, cfg);
    projector = &built;
  }
  if (projector != nullptr) {
    Require(projector->dim() == model.text.dim(),
            "projector dimension does not match the model");
  }
  std::vector<AdversarialPair> out(dataset.pairs.size());
  ParallelFor(dataset.pairs.size(), jobs, [&](std::size_t p) {
    Rng rng = StreamRng(cfg.master_seed, {static_cast<std::uint64_t>(p)});
    out[p] = AttackPair(dataset.pairs[p], model,
                        variant.projection ? projector : nullptr, variant, cfg,
                        rng);
  });
  return out;
}

std::vector<ExperimentReport> RunTransferExperiment(
    const SyntheticDataset& dataset, const std::vector<EncoderPair>& pool,
    const AttackVariant& variant, const AttackConfig& cfg, int jobs) {
  Require(pool.size() >= 2, "a transfer experiment needs at least 2 models");
  std::vector<std::vector<AdversarialPair>> crafted;
  crafted.reserve(pool.size());
  for (const EncoderPair& model : pool) {
    crafted.push_back(AttackDataset(dataset, model, variant, cfg, jobs));
  }

  std::vector<ImageTensor> clean_images;
  std::vector<Caption> clean_captions;
  for (const ImageCaptionPair& pair : dataset.pairs) {
    clean_images.push_back(pair.image);
    clean_captions.push_back(pair.caption);
  }

  std::vector<ExperimentReport> reports;
  for (std::size_t s = 0; s < pool.size(); ++s) {
    std::vector<ImageTensor> adv_images;
    std::vector<Caption> adv_captions;
    for (const AdversarialPair& a : crafted[s]) {
      adv_images.push_back(a.image.adversarial);
      adv_captions.push_back(a.text.adversarial);
    }
    for (std::size_t t = 0; t < pool.size(); ++t) {
      const EncoderPair& target = pool[t];
      ExperimentReport r;
      r.surrogate = pool[s].id();
      r.target = target.id();
      r.seed = cfg.master_seed;
      r.variant = variant.name;
      for (RetrievalDirection dir : {RetrievalDirection::kTextRetrieval,
                                     RetrievalDirection::kImageRetrieval}) {
        const RetrievalResult clean =
            EvaluateRetrieval(target, clean_images, clean_captions, dir);
        const RetrievalResult adv =
            EvaluateRetrieval(target, adv_images, adv_captions, dir);
        const double asr = AttackSuccessRate(clean.ranks, adv.ranks);
        (dir == RetrievalDirection::kTextRetrieval ? r.tr_asr : r.ir_asr) = asr;
      }
      double alpha_sum = 0.0;
      for (std::size_t p = 0; p < dataset.pairs.size(); ++p) {
        alpha_sum += AlphaMetric(target, dataset.pairs[p], adv_images[p],
                                 adv_captions[p],
                                 crafted[t][p].image.adversarial,
                                 crafted[t][p].text.adversarial);
      }
      r.alpha_mean = alpha_sum / static_cast<double>(dataset.pairs.size());
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

namespace {

template <typename Pred, typename Fold>
double FoldReports(const std::vector<ExperimentReport>& reports, Pred pred,
                   Fold fold, double init) {
  double acc = init;
  bool any = false;
  for (const ExperimentReport& r : reports) {
    if (!pred(r)) continue;
    acc = fold(acc, r);
    any = true;
  }
  Require(any, "no matching report cells");
  return acc;
}

bool OffDiagonal(const ExperimentReport& r) { return r.surrogate != r.target; }

std::size_t CountOffDiagonal(const std::vector<ExperimentReport>& reports) {
  return static_cast<std::size_t>(
      std::count_if(reports.begin(), reports.end(), OffDiagonal));
}

}  // namespace

double MeanTransferAsr(const std::vector<ExperimentReport>& reports) {
  const double sum = FoldReports(
      reports, OffDiagonal,
      [](double acc, const ExperimentReport& r) { return acc + r.asr(); }, 0.0);
  return sum / static_cast<double>(CountOffDiagonal(reports));
}

double MeanTransferAlpha(const std::vector<ExperimentReport>& reports) {
  const double sum = FoldReports(
      reports, OffDiagonal,
      [](double acc, const ExperimentReport& r) { return acc + r.alpha_mean; },
      0.0);
  return sum / static_cast<double>(CountOffDiagonal(reports));
}

double MinWhiteBoxAsr(const std::vector<ExperimentReport>& reports) {
  return FoldReports(
      reports, [](const ExperimentReport& r) { return !OffDiagonal(r); },
      [](double acc, const ExperimentReport& r) {
        return std::min(acc, r.asr());
      },
      100.0);
}

void WriteReport(const std::vector<ExperimentReport>& reports,
                 std::ostream& out) {
  out << kReportHeader << '\n';
  for (const ExperimentReport& r : reports) {
    out << r.surrogate << ',' << r.target << ',' << FormatDouble(r.tr_asr)
        << ',' << FormatDouble(r.ir_asr) << ',' << FormatDouble(r.alpha_mean)
        << ',' << r.seed << '\n';
  }
}

void WriteReport(const std::vector<ExperimentReport>& reports,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  WriteReport(reports, out);
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "failed writing '" + path + "'");
}

namespace {

template <typename T>
T ParseNumber(const std::string& field, const std::string& what) {
  T value{};
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    Fail(ErrorCode::kIo, "malformed " + what + " field '" + field + "'");
  }
  return value;
}

}  // namespace

std::vector<ExperimentReport> ReadReport(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    Fail(ErrorCode::kIo, "report header missing or unexpected");
  }
  std::vector<ExperimentReport> reports;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) {
      Fail(ErrorCode::kIo, "report row has " + std::to_string(fields.size()) +
                               " fields, expected 6");
    }
    ExperimentReport r;
    r.surrogate = fields[0];
    r.target = fields[1];
    r.tr_asr = ParseNumber<double>(fields[2], "tr_asr");
    r.ir_asr = ParseNumber<double>(fields[3], "ir_asr");
    r.alpha_mean = ParseNumber<double>(fields[4], "alpha_mean");
    r.seed = ParseNumber<std::uint64_t>(fields[5], "seed");
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<ExperimentReport> ReadReport(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "'");
  return ReadReport(in);
}

}  // namespace saaet
