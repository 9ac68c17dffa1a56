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

#include "phonemode/feature_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "phonemode/error.h"

namespace phonemode {
namespace wire {

void PutU8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutU64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutF64(std::vector<uint8_t>& out, double v) { PutU64(out, std::bit_cast<uint64_t>(v)); }

void Reader::Need(size_t n) const {
  if (pos_ + n > bytes_.size()) {
    throw Error(ErrorCode::kTruncatedHeader, "unexpected end of binary data at byte " +
                                                 std::to_string(pos_));
  }
}

uint8_t Reader::U8() {
  Need(1);
  return bytes_[pos_++];
}

uint16_t Reader::U16() {
  Need(2);
  const uint16_t v = static_cast<uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
  pos_ += 2;
  return v;
}

uint32_t Reader::U32() {
  Need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

uint64_t Reader::U64() {
  Need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double Reader::F64() { return std::bit_cast<double>(U64()); }

void Reader::Expect(const char magic[4]) {
  Need(4);
  if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
    throw Error(ErrorCode::kParse, std::string("bad magic, expected ") + std::string(magic, 4));
  }
  pos_ += 4;
}

std::vector<uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

void WriteFile(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

}  // namespace wire

std::vector<uint8_t> EncodeFeatures(const FeatureMatrix& f) {
  std::vector<uint8_t> out;
  out.reserve(16 + f.data().size() * 8);
  for (const char c : {'P', 'H', 'F', 'E'}) out.push_back(static_cast<uint8_t>(c));
  wire::PutU16(out, kFeatureFileVersion);
  wire::PutU16(out, static_cast<uint16_t>(f.kind()));
  wire::PutU32(out, static_cast<uint32_t>(f.rows()));
  wire::PutU32(out, static_cast<uint32_t>(f.cols()));
  for (double v : f.data()) wire::PutF64(out, v);
  return out;
}

FeatureMatrix DecodeFeatures(std::span<const uint8_t> bytes) {
  wire::Reader r(bytes);
  r.Expect("PHFE");
  const uint16_t version = r.U16();
  if (version != kFeatureFileVersion) {
    throw Error(ErrorCode::kParse, "unsupported PHFE version " + std::to_string(version));
  }
  const uint16_t tag = r.U16();
  if (tag < 1 || tag > 8) throw Error(ErrorCode::kParse, "unknown PHFE kind tag");
  const uint32_t rows = r.U32();
  const uint32_t cols = r.U32();
  std::vector<double> data(static_cast<size_t>(rows) * cols);
  for (double& v : data) v = r.F64();
  if (!r.done()) throw Error(ErrorCode::kParse, "trailing bytes after PHFE payload");
  return FeatureMatrix(static_cast<FeatureKind>(tag), rows, cols, std::move(data));
}

void SaveFeatures(const FeatureMatrix& f, const std::filesystem::path& path) {
  wire::WriteFile(path, EncodeFeatures(f));
}

FeatureMatrix LoadFeatures(const std::filesystem::path& path) {
  return DecodeFeatures(wire::ReadFile(path));
}

}  // namespace phonemode
