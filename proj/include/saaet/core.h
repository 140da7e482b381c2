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

#ifndef SAAET_CORE_H_
#define SAAET_CORE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace saaet {

// Feature vector produced by either encoder; image and text share the
// dimension.
using Embedding = Eigen::VectorXd;

// Row-major H x W grid of intensities, every pixel in [0, 1].
class ImageTensor {
 public:
  ImageTensor() = default;
  // Throws kInvalidArgument if the length is not height * width or a pixel is
  // outside [0, 1].
  ImageTensor(std::size_t height, std::size_t width, Eigen::VectorXd pixels);

  static ImageTensor Constant(std::size_t height, std::size_t width,
                              double value);
  // Clamps every entry into [0, 1] before construction.
  static ImageTensor Clamped(std::size_t height, std::size_t width,
                             Eigen::VectorXd pixels);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return height_ * width_; }
  const Eigen::VectorXd& pixels() const { return pixels_; }
  double at(std::size_t row, std::size_t col) const {
    return pixels_[static_cast<Eigen::Index>(row * width_ + col)];
  }

  bool SameShape(const ImageTensor& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool operator==(const ImageTensor& other) const;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  Eigen::VectorXd pixels_;
};

struct Caption {
  std::vector<int> tokens;

  std::size_t length() const { return tokens.size(); }
  bool operator==(const Caption& other) const = default;
};

// Number of positions where two equal-length captions differ.
std::size_t HammingDistance(const Caption& a, const Caption& b);

// Barycentric weights of a point in the evolution triangle: lambda on the
// clean image, beta on the previous iterate, gamma on the current iterate.
struct SimplexWeights {
  double lambda = 1.0;
  double beta = 0.0;
  double gamma = 0.0;

  static constexpr double kSumTolerance = 1e-12;

  // Throws kInvalidArgument unless every weight is in [0, 1] and the three
  // sum to one within kSumTolerance.
  static SimplexWeights Make(double lambda, double beta, double gamma);
  bool operator==(const SimplexWeights& other) const = default;
};

// The six strict orderings of (lambda, beta, gamma). A is the default
// sampling region: clean image dominant, previous iterate second.
enum class SubTriangle { kA, kB, kC, kD, kE, kF };

char SubTriangleLetter(SubTriangle region);
SubTriangle SubTriangleFromLetter(char letter);

struct AttackConfig {
  double eps_image = 8.0 / 255.0;
  double alpha = 2.0 / 255.0;
  int steps = 10;
  int samples = 5;
  std::vector<double> scales = {0.50, 0.75, 1.00, 1.25, 1.50};
  int text_budget = 1;
  int word_list_size = 10;
  double kappa = 0.6;
  double mu = 0.2;
  double nu = 0.2;
  double corpus_proportion = 0.40;
  SubTriangle region = SubTriangle::kA;
  std::uint64_t master_seed = 0;

  // Throws kInvalidArgument on the first violated constraint.
  void Validate() const;
};

// J = <img, txt> / d.
double SimilarityLoss(const Embedding& img_emb, const Embedding& txt_emb);

// lambda * x + beta * x_prev + gamma * x_cur, pixelwise.
ImageTensor ConvexCombine(const ImageTensor& x, const ImageTensor& x_prev,
                          const ImageTensor& x_cur, const SimplexWeights& w);

// Clamp into [origin - eps, origin + eps] intersected with [0, 1].
ImageTensor LinfProject(const ImageTensor& candidate, const ImageTensor& origin,
                        double eps);
// Same projection for an unconstrained candidate (e.g. x + step, which may
// leave [0, 1] before projection).
ImageTensor LinfProjectPixels(const Eigen::VectorXd& candidate,
                              const ImageTensor& origin, double eps);

// One-axis bilinear resampling with half-pixel centres and edge clamping.
// Every output sample reads at most two inputs with weights summing to one.
class Resize1D {
 public:
  Resize1D(std::size_t in_size, std::size_t out_size);

  std::size_t in_size() const { return in_size_; }
  std::size_t out_size() const { return out_size_; }

  struct Tap {
    std::size_t lo;
    std::size_t hi;
    double w_lo;
    double w_hi;
  };
  const std::vector<Tap>& taps() const { return taps_; }

 private:
  std::size_t in_size_;
  std::size_t out_size_;
  std::vector<Tap> taps_;
};

// Resize an H x W image to round(scale*H) x round(scale*W) and back, both
// bilinear. The composite is a fixed linear map, so its transpose gives the
// exact gradient through the augmentation.
class ScaleAugment {
 public:
  ScaleAugment(std::size_t height, std::size_t width, double scale);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  double scale() const { return scale_; }
  bool is_identity() const { return identity_; }

  Eigen::VectorXd Apply(const Eigen::VectorXd& pixels) const;
  Eigen::VectorXd ApplyTranspose(const Eigen::VectorXd& cotangent) const;

 private:
  std::size_t height_;
  std::size_t width_;
  double scale_;
  bool identity_;
  Resize1D down_rows_;
  Resize1D down_cols_;
  Resize1D up_rows_;
  Resize1D up_cols_;
};

ImageTensor ScaleAugmentImage(const ImageTensor& x, double scale);

}  // namespace saaet

#endif  // SAAET_CORE_H_
