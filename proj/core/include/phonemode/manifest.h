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

#ifndef PHONEMODE_MANIFEST_H_
#define PHONEMODE_MANIFEST_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phonemode {

// Class indices are fixed repo-wide: 0 = Conversation, 1 = Read.
enum class Mode { kConversation = 0, kRead = 1 };
inline constexpr int kNumModes = 2;

enum class Split { kTrain, kDev, kTest };

// Named languages plus an escape hatch written as "other:<label>".
struct Language {
  std::string name;  // canonical: Telugu, Kannada, Odia, Bengali or other:<label>

  bool operator==(const Language&) const = default;
  auto operator<=>(const Language&) const = default;
};

std::string_view ModeName(Mode m);
std::string_view SplitName(Split s);
Mode ParseMode(std::string_view token);
Split ParseSplit(std::string_view token);
Language ParseLanguage(std::string_view token);

struct ManifestEntry {
  std::filesystem::path audio_path;  // resolved against the manifest directory
  Language language;
  Mode mode = Mode::kRead;
  std::string speaker_id;
  Split split = Split::kTrain;
  std::optional<std::vector<std::string>> transcript;  // IPA labels
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  // Validation findings that do not stop loading, e.g. a speaker present in
  // both the train and test splits.
  std::vector<std::string> warnings;

  std::vector<const ManifestEntry*> Select(Split split) const;
};

// Tab-separated: audio_path language mode speaker_id split transcript.
// '#' starts a comment line. Errors name the 1-based line number.
Manifest ParseManifest(std::string_view text, const std::filesystem::path& base_dir = {});
Manifest LoadManifest(const std::filesystem::path& path);

// Inverse of ParseManifest; audio paths are written relative to base_dir
// when possible.
std::string FormatManifest(const std::vector<ManifestEntry>& entries,
                           const std::filesystem::path& base_dir = {});

}  // namespace phonemode

#endif  // PHONEMODE_MANIFEST_H_
