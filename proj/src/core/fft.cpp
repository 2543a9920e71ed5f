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

#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace beatvox {
namespace {

// FFTW planning is not thread-safe; execution on fresh arrays is. Plans are
// created once per size under a lock and executed with the new-array API on
// fftw_malloc'd buffers so alignment always matches the plan.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  PlanPair p;
  const int size = static_cast<int>(n);
  p.forward = fftw_plan_dft_r2c_1d(size, in, out, FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(size, out, in, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  cache.emplace(n, p);
  return p;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

std::vector<std::complex<double>> real_dft(std::span<const double> input) {
  const std::size_t n = input.size();
  if (n == 0) return {};
  const PlanPair plans = plans_for(n);
  std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(n / 2 + 1));
  std::copy(input.begin(), input.end(), in.get());
  fftw_execute_dft_r2c(plans.forward, in.get(), out.get());
  std::vector<std::complex<double>> bins(n / 2 + 1);
  for (std::size_t b = 0; b < bins.size(); ++b)
    bins[b] = {out.get()[b][0], out.get()[b][1]};
  return bins;
}

std::vector<double> inverse_real_dft(std::span<const std::complex<double>> bins,
                                     std::size_t n) {
  if (n == 0) return {};
  const PlanPair plans = plans_for(n);
  std::unique_ptr<fftw_complex, FftwDeleter> in(fftw_alloc_complex(n / 2 + 1));
  std::unique_ptr<double, FftwDeleter> out(fftw_alloc_real(n));
  for (std::size_t b = 0; b < n / 2 + 1; ++b) {
    const std::complex<double> v = b < bins.size() ? bins[b] : 0.0;
    in.get()[b][0] = v.real();
    in.get()[b][1] = v.imag();
  }
  // c2r destroys its input; it is a scratch copy here.
  fftw_execute_dft_c2r(plans.inverse, in.get(), out.get());
  std::vector<double> result(out.get(), out.get() + n);
  for (double& x : result) x /= static_cast<double>(n);
  return result;
}

}  // namespace beatvox
