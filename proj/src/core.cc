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

#include "saaet/core.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "saaet/error.h"

namespace saaet {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid-argument";
    case ErrorCode::kDegenerateCorpus:
      return "degenerate-corpus";
    case ErrorCode::kUnsupportedBudget:
      return "unsupported-budget";
    case ErrorCode::kUndefinedAsr:
      return "undefined-asr";
    case ErrorCode::kDegenerateAlpha:
      return "degenerate-alpha";
    case ErrorCode::kIo:
      return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

ImageTensor::ImageTensor(std::size_t height, std::size_t width,
                         Eigen::VectorXd pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  Require(static_cast<std::size_t>(pixels_.size()) == height * width,
          "pixel count does not match height * width");
  for (Eigen::Index i = 0; i < pixels_.size(); ++i) {
    const double p = pixels_[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "pixel " << i << " = " << p << " outside [0, 1]";
      Fail(ErrorCode::kInvalidArgument, msg.str());
    }
  }
}

ImageTensor ImageTensor::Constant(std::size_t height, std::size_t width,
                                  double value) {
  return ImageTensor(height, width,
                     Eigen::VectorXd::Constant(
                         static_cast<Eigen::Index>(height * width), value));
}

ImageTensor ImageTensor::Clamped(std::size_t height, std::size_t width,
                                 Eigen::VectorXd pixels) {
  pixels = pixels.cwiseMax(0.0).cwiseMin(1.0);
  return ImageTensor(height, width, std::move(pixels));
}

bool ImageTensor::operator==(const ImageTensor& other) const {
  return SameShape(other) && pixels_ == other.pixels_;
}

std::size_t HammingDistance(const Caption& a, const Caption& b) {
  Require(a.length() == b.length(), "captions differ in length");
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.length(); ++i) {
    if (a.tokens[i] != b.tokens[i]) ++count;
  }
  return count;
}

SimplexWeights SimplexWeights::Make(double lambda, double beta, double gamma) {
  for (double v : {lambda, beta, gamma}) {
    Require(v >= 0.0 && v <= 1.0, "simplex weight outside [0, 1]");
  }
  Require(std::abs(lambda + beta + gamma - 1.0) <= kSumTolerance,
          "simplex weights must sum to 1");
  return SimplexWeights{lambda, beta, gamma};
}

char SubTriangleLetter(SubTriangle region) {
  return static_cast<char>('A' + static_cast<int>(region));
}

SubTriangle SubTriangleFromLetter(char letter) {
  if (letter >= 'a' && letter <= 'f') letter = static_cast<char>(letter - 32);
  Require(letter >= 'A' && letter <= 'F',
          std::string("unknown sub-triangle '") + letter + "'");
  return static_cast<SubTriangle>(letter - 'A');
}

void AttackConfig::Validate() const {
  Require(eps_image > 0.0, "eps_image must be positive");
  Require(alpha > 0.0, "alpha must be positive");
  Require(steps >= 2, "steps must be at least 2");
  Require(samples >= 1, "samples must be at least 1");
  Require(!scales.empty(), "scale set is empty");
  for (double s : scales) Require(s > 0.0, "scales must be positive");
  Require(text_budget >= 0, "text budget must be non-negative");
  Require(word_list_size >= 0, "word list size must be non-negative");
  Require(kappa >= 0.0 && mu >= 0.0 && nu >= 0.0,
          "kappa, mu, nu must be non-negative");
  Require(std::abs(kappa + mu + nu - 1.0) <= 1e-12,
          "kappa + mu + nu must equal 1");
  Require(mu + nu > 0.0, "adversarial image weight mu + nu must be positive");
  Require(corpus_proportion > 0.0 && corpus_proportion <= 1.0,
          "corpus proportion must lie in (0, 1]");
}

double SimilarityLoss(const Embedding& img_emb, const Embedding& txt_emb) {
  Require(img_emb.size() == txt_emb.size(), "embedding dimension mismatch");
  Require(img_emb.size() > 0, "empty embedding");
  return img_emb.dot(txt_emb) / static_cast<double>(img_emb.size());
}

ImageTensor ConvexCombine(const ImageTensor& x, const ImageTensor& x_prev,
                          const ImageTensor& x_cur, const SimplexWeights& w) {
  Require(x.SameShape(x_prev) && x.SameShape(x_cur), "image shape mismatch");
  Eigen::VectorXd out = w.lambda * x.pixels() + w.beta * x_prev.pixels() +
                        w.gamma * x_cur.pixels();
  // Rounding can leave a convex combination of in-range values a few ulps
  // outside [0, 1].
  return ImageTensor::Clamped(x.height(), x.width(), std::move(out));
}

ImageTensor LinfProject(const ImageTensor& candidate, const ImageTensor& origin,
                        double eps) {
  Require(candidate.SameShape(origin), "image shape mismatch");
  return LinfProjectPixels(candidate.pixels(), origin, eps);
}

ImageTensor LinfProjectPixels(const Eigen::VectorXd& candidate,
                              const ImageTensor& origin, double eps) {
  Require(static_cast<std::size_t>(candidate.size()) == origin.size(),
          "image shape mismatch");
  Require(eps > 0.0, "eps must be positive");
  const Eigen::VectorXd lo = (origin.pixels().array() - eps).max(0.0);
  const Eigen::VectorXd hi = (origin.pixels().array() + eps).min(1.0);
  Eigen::VectorXd out = candidate.cwiseMax(lo).cwiseMin(hi);
  return ImageTensor(origin.height(), origin.width(), std::move(out));
}

Resize1D::Resize1D(std::size_t in_size, std::size_t out_size)
    : in_size_(in_size), out_size_(out_size) {
  Require(in_size > 0 && out_size > 0, "resize to or from zero size");
  taps_.reserve(out_size);
  const double ratio =
      static_cast<double>(in_size) / static_cast<double>(out_size);
  const double last = static_cast<double>(in_size - 1);
  for (std::size_t i = 0; i < out_size; ++i) {
    double src = (static_cast<double>(i) + 0.5) * ratio - 0.5;
    src = std::clamp(src, 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const std::size_t hi = std::min(lo + 1, in_size - 1);
    const double frac = src - static_cast<double>(lo);
    taps_.push_back(Tap{lo, hi, 1.0 - frac, frac});
  }
}

namespace {

// Resample a row-major rows x cols grid with `row_map` along the vertical axis
// and `col_map` along the horizontal one.
Eigen::VectorXd Resample(const Eigen::VectorXd& in, const Resize1D& row_map,
                         const Resize1D& col_map) {
  const std::size_t rows = row_map.in_size();
  const std::size_t cols = col_map.in_size();
  const std::size_t out_rows = row_map.out_size();
  const std::size_t out_cols = col_map.out_size();
  Eigen::VectorXd tmp(static_cast<Eigen::Index>(rows * out_cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < out_cols; ++j) {
      const auto& t = col_map.taps()[j];
      tmp[static_cast<Eigen::Index>(r * out_cols + j)] =
          t.w_lo * in[static_cast<Eigen::Index>(r * cols + t.lo)] +
          t.w_hi * in[static_cast<Eigen::Index>(r * cols + t.hi)];
    }
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(out_rows * out_cols));
  for (std::size_t i = 0; i < out_rows; ++i) {
    const auto& t = row_map.taps()[i];
    for (std::size_t j = 0; j < out_cols; ++j) {
      out[static_cast<Eigen::Index>(i * out_cols + j)] =
          t.w_lo * tmp[static_cast<Eigen::Index>(t.lo * out_cols + j)] +
          t.w_hi * tmp[static_cast<Eigen::Index>(t.hi * out_cols + j)];
    }
  }
  return out;
}

// Transpose of Resample.
Eigen::VectorXd ResampleTranspose(const Eigen::VectorXd& cot,
                                  const Resize1D& row_map,
                                  const Resize1D& col_map) {
  const std::size_t rows = row_map.in_size();
  const std::size_t cols = col_map.in_size();
  const std::size_t out_rows = row_map.out_size();
  const std::size_t out_cols = col_map.out_size();
  Eigen::VectorXd tmp =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows * out_cols));
  for (std::size_t i = 0; i < out_rows; ++i) {
    const auto& t = row_map.taps()[i];
    for (std::size_t j = 0; j < out_cols; ++j) {
      const double g = cot[static_cast<Eigen::Index>(i * out_cols + j)];
      tmp[static_cast<Eigen::Index>(t.lo * out_cols + j)] += t.w_lo * g;
      tmp[static_cast<Eigen::Index>(t.hi * out_cols + j)] += t.w_hi * g;
    }
  }
  Eigen::VectorXd in = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows * cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < out_cols; ++j) {
      const auto& t = col_map.taps()[j];
      const double g = tmp[static_cast<Eigen::Index>(r * out_cols + j)];
      in[static_cast<Eigen::Index>(r * cols + t.lo)] += t.w_lo * g;
      in[static_cast<Eigen::Index>(r * cols + t.hi)] += t.w_hi * g;
    }
  }
  return in;
}

std::size_t ScaledSize(std::size_t n, double scale) {
  Require(scale > 0.0, "scale must be positive");
  const double scaled = std::round(scale * static_cast<double>(n));
  Require(scaled >= 1.0, "scale produces a zero-size intermediate image");
  return static_cast<std::size_t>(scaled);
}

}  // namespace

ScaleAugment::ScaleAugment(std::size_t height, std::size_t width, double scale)
    : height_(height),
      width_(width),
      scale_(scale),
      identity_(ScaledSize(height, scale) == height &&
                ScaledSize(width, scale) == width),
      down_rows_(height, ScaledSize(height, scale)),
      down_cols_(width, ScaledSize(width, scale)),
      up_rows_(ScaledSize(height, scale), height),
      up_cols_(ScaledSize(width, scale), width) {}

Eigen::VectorXd ScaleAugment::Apply(const Eigen::VectorXd& pixels) const {
  Require(static_cast<std::size_t>(pixels.size()) == height_ * width_,
          "pixel count does not match augmenter shape");
  if (identity_) return pixels;
  return Resample(Resample(pixels, down_rows_, down_cols_), up_rows_,
                  up_cols_);
}

Eigen::VectorXd ScaleAugment::ApplyTranspose(
    const Eigen::VectorXd& cotangent) const {
  Require(static_cast<std::size_t>(cotangent.size()) == height_ * width_,
          "cotangent size does not match augmenter shape");
  if (identity_) return cotangent;
  return ResampleTranspose(ResampleTranspose(cotangent, up_rows_, up_cols_),
                           down_rows_, down_cols_);
}

ImageTensor ScaleAugmentImage(const ImageTensor& x, double scale) {
  const ScaleAugment augment(x.height(), x.width(), scale);
  // Bilinear weights are a convex combination, so the result stays in range
  // up to rounding.
  return ImageTensor::Clamped(x.height(), x.width(), augment.Apply(x.pixels()));
}

}  // namespace saaet
