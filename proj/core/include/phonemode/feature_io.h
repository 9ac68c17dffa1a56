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

#ifndef PHONEMODE_FEATURE_IO_H_
#define PHONEMODE_FEATURE_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "phonemode/spectral.h"

namespace phonemode {

// PHFE container, little-endian:
//   "PHFE" | u16 version | u16 kind tag | u32 rows | u32 cols | rows*cols f64
inline constexpr uint16_t kFeatureFileVersion = 1;

std::vector<uint8_t> EncodeFeatures(const FeatureMatrix& f);
FeatureMatrix DecodeFeatures(std::span<const uint8_t> bytes);

void SaveFeatures(const FeatureMatrix& f, const std::filesystem::path& path);
FeatureMatrix LoadFeatures(const std::filesystem::path& path);

// Little-endian primitive helpers shared by the binary formats.
namespace wire {
void PutU8(std::vector<uint8_t>& out, uint8_t v);
void PutU16(std::vector<uint8_t>& out, uint16_t v);
void PutU32(std::vector<uint8_t>& out, uint32_t v);
void PutU64(std::vector<uint8_t>& out, uint64_t v);
void PutF64(std::vector<uint8_t>& out, double v);

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}
  uint8_t U8();
  uint16_t U16();
  uint32_t U32();
  uint64_t U64();
  double F64();
  void Expect(const char magic[4]);
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(size_t n) const;
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

std::vector<uint8_t> ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::span<const uint8_t> bytes);
}  // namespace wire

}  // namespace phonemode

#endif  // PHONEMODE_FEATURE_IO_H_
