// Copyright 2026 The beatvox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BEATVOX_CORE_FFT_HPP_
#define BEATVOX_CORE_FFT_HPP_

#include <complex>
#include <span>
#include <vector>

namespace beatvox {

// Forward real DFT (unnormalised); returns N/2+1 bins.
std::vector<std::complex<double>> real_dft(std::span<const double> input);

// Inverse of real_dft, normalised by 1/n.
std::vector<double> inverse_real_dft(std::span<const std::complex<double>> bins,
                                     std::size_t n);

}  // namespace beatvox

#endif  // BEATVOX_CORE_FFT_HPP_
