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

#ifndef PHONEMODE_SCORING_H_
#define PHONEMODE_SCORING_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phonemode/excitation.h"
#include "phonemode/manifest.h"

namespace phonemode {

struct AlignmentCounts {
  size_t substitutions = 0;
  size_t deletions = 0;
  size_t insertions = 0;
  size_t reference_length = 0;

  size_t errors() const { return substitutions + deletions + insertions; }
  AlignmentCounts& operator+=(const AlignmentCounts& o);
  bool operator==(const AlignmentCounts&) const = default;
};

struct PerResult {
  double error_rate = 0.0;
  AlignmentCounts counts;
};

// Unit-cost Levenshtein alignment. On equal cost the backtrace prefers
// substitution/match, then insertion, then deletion.
PerResult PhoneErrorRate(std::span<const int> ref, std::span<const int> hyp);

// Corpus-level rate: total errors over total reference length.
inline double ErrorRate(const AlignmentCounts& c) {
  return c.reference_length ? static_cast<double>(c.errors()) / c.reference_length : 0.0;
}

// Population-normalized Pearson coefficient. Throws kUndefinedCorrelation
// when either input has zero variance.
double CorrelationCoefficient(std::span<const double> r, std::span<const double> q);

struct ContourRecord {
  Language language;
  Mode mode = Mode::kRead;
  std::string speaker_id;
  std::vector<double> values;
};

struct CorrelationOptions {
  size_t speakers_per_mode = 2;
  size_t max_utterances = 50;  // per speaker
};

struct CorrelationCell {
  std::string language;
  std::string label;  // "conversation", "read" or "conversation-read"
  bool available = false;
  double mean_cc = 0.0;
  size_t pairs = 0;
  size_t skipped = 0;  // zero-variance pairs
  std::string note;
};

struct CorrelationReport {
  ContourKind kind = ContourKind::kPitch;
  std::vector<CorrelationCell> within_mode;
  std::vector<CorrelationCell> between_mode;

  // Averages over available cells; nullopt if none.
  std::optional<double> MeanWithin() const;
  std::optional<double> MeanBetween() const;
  std::string FormatText() const;
  std::string FormatRecords() const;  // one JSON object per line
};

// Per-language mean contour is subtracted before any pair is scored.
CorrelationReport ModeCorrelationReport(const std::vector<ContourRecord>& records,
                                        ContourKind kind, const CorrelationOptions& opts = {});

struct AccuracyRow {
  std::string group;
  size_t total = 0;
  size_t correct = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

struct AccuracyReport {
  std::vector<AccuracyRow> groups;  // sorted by key
  size_t total = 0;
  size_t correct = 0;
  double macro_average = 0.0;
  std::vector<std::string> class_names;
  std::vector<std::vector<size_t>> confusion;  // [label][prediction]
  std::vector<std::string> notes;

  double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
  std::string FormatText() const;
  std::string FormatRecords() const;
};

AccuracyReport AccuracyTable(std::span<const int> predictions, std::span<const int> labels,
                             std::span<const std::string> group_keys,
                             const std::vector<std::string>& class_names,
                             std::span<const std::string> expected_groups = {});

}  // namespace phonemode

#endif  // PHONEMODE_SCORING_H_
