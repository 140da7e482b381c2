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

#include "saaet/matrix_io.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "saaet/error.h"

namespace saaet {
namespace {

constexpr const char* kDescriptorFormat = "saaet-dataset-v1";

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream OpenForWrite(const std::string& path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  return out;
}

std::ifstream OpenForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "'");
  return in;
}

void FinishWrite(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "failed writing '" + path + "'");
}

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T ParseValue(const std::map<std::string, std::string>& kv,
             const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) Fail(ErrorCode::kIo, "descriptor lacks key '" + key + "'");
  T value{};
  const std::string& s = it->second;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    Fail(ErrorCode::kIo, "bad value '" + s + "' for key '" + key + "'");
  }
  return value;
}

}  // namespace

void WriteMatrix(const Eigen::MatrixXd& m, std::ostream& out) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << FormatDouble(m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd ReadMatrix(std::istream& in) {
  Eigen::Index rows = -1, cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    Fail(ErrorCode::kIo, "malformed matrix header");
  }
  Eigen::MatrixXd m(rows, cols);
  std::string token;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> token)) Fail(ErrorCode::kIo, "matrix data truncated");
      const auto res =
          std::from_chars(token.data(), token.data() + token.size(), m(i, j));
      if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        Fail(ErrorCode::kIo, "malformed matrix entry '" + token + "'");
      }
    }
  }
  return m;
}

void WriteModel(const EncoderPair& model, const std::string& path) {
  std::ofstream out = OpenForWrite(path);
  out << model.id() << '\n';
  WriteMatrix(model.image.weight, out);
  WriteMatrix(model.text.table, out);
  FinishWrite(out, path);
}

EncoderPair ReadModel(const std::string& path) {
  std::ifstream in = OpenForRead(path);
  std::string id;
  if (!std::getline(in, id) || Trim(id).empty()) {
    Fail(ErrorCode::kIo, "model file '" + path + "' lacks an id line");
  }
  id = Trim(id);
  EncoderPair model;
  model.image = {ReadMatrix(in), id};
  model.text = {ReadMatrix(in), id};
  model.Validate();
  return model;
}

void WriteProjector(const ProjectionBasis& pb, const std::string& path) {
  std::ofstream out = OpenForWrite(path);
  WriteMatrix(pb.projector(), out);
  FinishWrite(out, path);
}

ProjectionBasis ReadProjector(const std::string& path) {
  std::ifstream in = OpenForRead(path);
  return ProjectionBasis::FromProjector(ReadMatrix(in));
}

std::map<std::string, std::string> ReadKeyValueFile(const std::string& path) {
  std::ifstream in = OpenForRead(path);
  std::map<std::string, std::string> kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorCode::kIo, path + ":" + std::to_string(number) +
                               ": expected key=value");
    }
    kv[Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
  }
  return kv;
}

void WriteDatasetDescriptor(const DatasetSpec& spec, const std::string& path) {
  std::ofstream out = OpenForWrite(path);
  out << "format=" << kDescriptorFormat << '\n'
      << "seed=" << spec.seed << '\n'
      << "pairs=" << spec.pairs << '\n'
      << "height=" << spec.height << '\n'
      << "width=" << spec.width << '\n'
      << "dim=" << spec.dim << '\n'
      << "vocab=" << spec.vocab << '\n'
      << "caption_length=" << spec.caption_length << '\n'
      << "latent_dim=" << spec.latent_dim << '\n'
      << "held_out=" << spec.held_out << '\n'
      << "image_contrast=" << FormatDouble(spec.image_contrast) << '\n'
      << "redundancy=" << FormatDouble(spec.redundancy) << '\n';
  FinishWrite(out, path);
}

DatasetSpec ReadDatasetDescriptor(const std::string& path) {
  const auto kv = ReadKeyValueFile(path);
  const auto format = kv.find("format");
  if (format == kv.end() || format->second != kDescriptorFormat) {
    Fail(ErrorCode::kIo, "'" + path + "' is not a dataset descriptor");
  }
  DatasetSpec spec;
  spec.seed = ParseValue<std::uint64_t>(kv, "seed");
  spec.pairs = ParseValue<int>(kv, "pairs");
  spec.height = ParseValue<int>(kv, "height");
  spec.width = ParseValue<int>(kv, "width");
  spec.dim = ParseValue<int>(kv, "dim");
  spec.vocab = ParseValue<int>(kv, "vocab");
  spec.caption_length = ParseValue<int>(kv, "caption_length");
  spec.latent_dim = ParseValue<int>(kv, "latent_dim");
  spec.held_out = ParseValue<int>(kv, "held_out");
  spec.image_contrast = ParseValue<double>(kv, "image_contrast");
  spec.redundancy = ParseValue<double>(kv, "redundancy");
  spec.Validate();
  return spec;
}

void WriteImage(const ImageTensor& x, std::ostream& out) {
  Eigen::MatrixXd grid(static_cast<Eigen::Index>(x.height()),
                       static_cast<Eigen::Index>(x.width()));
  for (std::size_t r = 0; r < x.height(); ++r) {
    for (std::size_t c = 0; c < x.width(); ++c) {
      grid(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          x.at(r, c);
    }
  }
  WriteMatrix(grid, out);
}

ImageTensor ReadImage(std::istream& in) {
  const Eigen::MatrixXd grid = ReadMatrix(in);
  Eigen::VectorXd pixels(grid.size());
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      pixels[r * grid.cols() + c] = grid(r, c);
    }
  }
  return ImageTensor(static_cast<std::size_t>(grid.rows()),
                     static_cast<std::size_t>(grid.cols()), std::move(pixels));
}

}  // namespace saaet
