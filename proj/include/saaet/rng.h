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

#ifndef SAAET_RNG_H_
#define SAAET_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace saaet {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t Mix64(std::uint64_t x);

// Seed for the stream identified by `path` under `master`. Distinct paths give
// statistically independent engines, so per-job streams do not depend on the
// order in which jobs are scheduled.
std::uint64_t DeriveSeed(std::uint64_t master,
                         std::initializer_list<std::uint64_t> path);

inline Rng StreamRng(std::uint64_t master,
                     std::initializer_list<std::uint64_t> path) {
  return Rng(DeriveSeed(master, path));
}

double StandardNormal(Rng& rng);
double Uniform01(Rng& rng);

}  // namespace saaet

#endif  // SAAET_RNG_H_
