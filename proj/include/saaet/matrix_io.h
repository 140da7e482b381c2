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

#ifndef SAAET_MATRIX_IO_H_
#define SAAET_MATRIX_IO_H_

#include <iosfwd>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "saaet/encoders.h"
#include "saaet/harness.h"
#include "saaet/subspace.h"

namespace saaet {

// Text matrix format: a "rows cols" line, then one line per row of
// space-separated values printed with round-trip precision.
void WriteMatrix(const Eigen::MatrixXd& m, std::ostream& out);
Eigen::MatrixXd ReadMatrix(std::istream& in);

// Model file: the model id on the first line, then the image weight matrix
// and the token table.
void WriteModel(const EncoderPair& model, const std::string& path);
EncoderPair ReadModel(const std::string& path);

void WriteProjector(const ProjectionBasis& pb, const std::string& path);
ProjectionBasis ReadProjector(const std::string& path);

// Flat key=value text; blank lines and lines starting with '#' are skipped.
// Throws kIo on unreadable files or malformed lines.
std::map<std::string, std::string> ReadKeyValueFile(const std::string& path);

// Dataset descriptor: format=saaet-dataset-v1 followed by every DatasetSpec
// field as key=value.
void WriteDatasetDescriptor(const DatasetSpec& spec, const std::string& path);
DatasetSpec ReadDatasetDescriptor(const std::string& path);

// Image file: "height width" then row-major pixels.
void WriteImage(const ImageTensor& x, std::ostream& out);
ImageTensor ReadImage(std::istream& in);

}  // namespace saaet

#endif  // SAAET_MATRIX_IO_H_
