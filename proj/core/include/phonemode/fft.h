/* Copyright 2026 The Phonemode Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PHONEMODE_FFT_H_
#define PHONEMODE_FFT_H_

#include <complex>
#include <span>
#include <vector>

namespace phonemode {

// In-place iterative radix-2 transform of a fixed power-of-two size.
class Fft {
 public:
  explicit Fft(size_t size);

  size_t size() const { return size_; }

  void Forward(std::vector<std::complex<double>>& data) const;

  // |X[k]|^2 for k = 0..size/2 of the zero-padded real input.
  std::vector<double> PowerSpectrum(std::span<const double> frame) const;

 private:
  size_t size_;
  std::vector<size_t> bit_reverse_;
  std::vector<std::complex<double>> twiddles_;
};

size_t NextPowerOfTwo(size_t n);

}  // namespace phonemode

#endif  // PHONEMODE_FFT_H_
