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

#include "phonemode/scoring.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"
#include "phonemode/error.h"

namespace phonemode {

AlignmentCounts& AlignmentCounts::operator+=(const AlignmentCounts& o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  reference_length += o.reference_length;
  return *this;
}

PerResult PhoneErrorRate(std::span<const int> ref, std::span<const int> hyp) {
  if (ref.empty()) throw Error(ErrorCode::kInvalidArgument, "empty reference sequence");
  const size_t n = ref.size();
  const size_t m = hyp.size();
  // d[i][j]: cost of aligning ref[0, i) with hyp[0, j).
  std::vector<std::vector<size_t>> d(n + 1, std::vector<size_t>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const size_t sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i][j - 1] + 1, d[i - 1][j] + 1});
    }
  }

  PerResult result;
  result.counts.reference_length = n;
  size_t i = n;
  size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const size_t cost = ref[i - 1] == hyp[j - 1] ? 0 : 1;
      if (d[i][j] == d[i - 1][j - 1] + cost) {
        result.counts.substitutions += cost;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      ++result.counts.insertions;
      --j;
      continue;
    }
    ++result.counts.deletions;
    --i;
  }
  result.error_rate = static_cast<double>(d[n][m]) / static_cast<double>(n);
  return result;
}

double CorrelationCoefficient(std::span<const double> r, std::span<const double> q) {
  if (r.size() != q.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "contours differ in length");
  }
  if (r.size() < 2) throw Error(ErrorCode::kLength, "correlation needs at least two points");
  const auto len = static_cast<double>(r.size());
  double mr = 0.0, mq = 0.0;
  for (size_t i = 0; i < r.size(); ++i) {
    mr += r[i];
    mq += q[i];
  }
  mr /= len;
  mq /= len;
  double vr = 0.0, vq = 0.0, cross = 0.0;
  for (size_t i = 0; i < r.size(); ++i) {
    const double a = r[i] - mr;
    const double b = q[i] - mq;
    vr += a * a;
    vq += b * b;
    cross += a * b;
  }
  if (!(vr > 0.0) || !(vq > 0.0)) {
    throw Error(ErrorCode::kUndefinedCorrelation, "zero-variance contour");
  }
  const double c = cross / std::sqrt(vr * vq);
  return std::clamp(c, -1.0, 1.0);
}

namespace {

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Mean CC over all cross pairs a x b (a and b may alias for within-set use).
void ScorePairs(const std::vector<const std::vector<double>*>& a,
                const std::vector<const std::vector<double>*>& b, CorrelationCell& cell) {
  double sum = 0.0;
  for (const auto* x : a) {
    for (const auto* y : b) {
      try {
        sum += CorrelationCoefficient(*x, *y);
        ++cell.pairs;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUndefinedCorrelation) throw;
        ++cell.skipped;
      }
    }
  }
  if (cell.pairs > 0) {
    cell.available = true;
    cell.mean_cc = sum / static_cast<double>(cell.pairs);
  } else {
    cell.note = "no scorable pairs";
  }
}

std::optional<double> MeanOf(const std::vector<CorrelationCell>& cells) {
  double sum = 0.0;
  size_t n = 0;
  for (const auto& c : cells) {
    if (!c.available) continue;
    sum += c.mean_cc;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

std::optional<double> CorrelationReport::MeanWithin() const { return MeanOf(within_mode); }
std::optional<double> CorrelationReport::MeanBetween() const { return MeanOf(between_mode); }

CorrelationReport ModeCorrelationReport(const std::vector<ContourRecord>& records,
                                        ContourKind kind, const CorrelationOptions& opts) {
  if (opts.speakers_per_mode < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least two speakers per mode");
  }
  CorrelationReport report;
  report.kind = kind;

  std::map<std::string, std::vector<const ContourRecord*>> by_language;
  for (const auto& r : records) by_language[r.language.name].push_back(&r);

  for (const auto& [language, recs] : by_language) {
    const size_t len = recs.front()->values.size();
    std::vector<double> mean(len, 0.0);
    for (const auto* r : recs) {
      if (r->values.size() != len) {
        throw Error(ErrorCode::kDimensionMismatch, "contours of " + language + " differ in length");
      }
      for (size_t i = 0; i < len; ++i) mean[i] += r->values[i];
    }
    for (double& v : mean) v /= static_cast<double>(recs.size());

    // mode -> speaker -> centered contours, speakers in first-seen order.
    std::vector<std::vector<double>> centered;
    centered.reserve(recs.size());
    std::array<std::vector<std::string>, kNumModes> speaker_order;
    std::array<std::map<std::string, std::vector<size_t>>, kNumModes> by_speaker;
    for (const auto* r : recs) {
      std::vector<double> c(len);
      for (size_t i = 0; i < len; ++i) c[i] = r->values[i] - mean[i];
      const auto mode = static_cast<size_t>(r->mode);
      auto& list = by_speaker[mode][r->speaker_id];
      if (list.empty()) speaker_order[mode].push_back(r->speaker_id);
      if (list.size() < opts.max_utterances) {
        list.push_back(centered.size());
        centered.push_back(std::move(c));
      }
    }

    // Per mode: the first N speakers' utterance sets.
    std::array<std::vector<std::vector<const std::vector<double>*>>, kNumModes> sets;
    for (size_t mode = 0; mode < kNumModes; ++mode) {
      for (size_t s = 0; s < speaker_order[mode].size() && s < opts.speakers_per_mode; ++s) {
        std::vector<const std::vector<double>*> utts;
        for (size_t idx : by_speaker[mode][speaker_order[mode][s]]) utts.push_back(&centered[idx]);
        sets[mode].push_back(std::move(utts));
      }
    }

    for (size_t mode = 0; mode < kNumModes; ++mode) {
      CorrelationCell cell;
      cell.language = language;
      cell.label = std::string(ModeName(static_cast<Mode>(mode)));
      if (sets[mode].size() < 2) {
        cell.note = "fewer than 2 speakers";
      } else {
        // Cross-speaker pairs only.
        for (size_t a = 0; a < sets[mode].size(); ++a)
          for (size_t b = a + 1; b < sets[mode].size(); ++b) {
            CorrelationCell part;
            ScorePairs(sets[mode][a], sets[mode][b], part);
            cell.mean_cc = (cell.mean_cc * cell.pairs + part.mean_cc * part.pairs) /
                           std::max<size_t>(1, cell.pairs + part.pairs);
            cell.pairs += part.pairs;
            cell.skipped += part.skipped;
          }
        cell.available = cell.pairs > 0;
        if (!cell.available) cell.note = "no scorable pairs";
      }
      report.within_mode.push_back(cell);
    }

    CorrelationCell between;
    between.language = language;
    between.label = "conversation-read";
    if (sets[0].size() < 2 || sets[1].size() < 2) {
      between.note = "fewer than 2 speakers in a mode";
    } else {
      std::array<std::vector<const std::vector<double>*>, kNumModes> pooled;
      for (size_t mode = 0; mode < kNumModes; ++mode)
        for (const auto& s : sets[mode]) pooled[mode].insert(pooled[mode].end(), s.begin(), s.end());
      ScorePairs(pooled[0], pooled[1], between);
    }
    report.between_mode.push_back(between);
  }
  return report;
}

std::string CorrelationReport::FormatText() const {
  std::ostringstream os;
  os << "# correlation report, contour=" << (kind == ContourKind::kPitch ? "pc" : "esc") << "\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-20s %-8s %-18s %8s %7s %7s\n", "language", "type", "cell",
                "mean_cc", "pairs", "skipped");
  os << line;
  auto emit = [&](const CorrelationCell& c, const char* type) {
    std::snprintf(line, sizeof(line), "%-20s %-8s %-18s %8s %7zu %7zu%s%s\n", c.language.c_str(),
                  type, c.label.c_str(), c.available ? Fixed(c.mean_cc).c_str() : "n/a", c.pairs,
                  c.skipped, c.note.empty() ? "" : "  # ", c.note.c_str());
    os << line;
  };
  for (const auto& c : within_mode) emit(c, "WM");
  for (const auto& c : between_mode) emit(c, "BM");
  const auto wm = MeanWithin();
  const auto bm = MeanBetween();
  os << "mean WM " << (wm ? Fixed(*wm) : "n/a") << "  mean BM " << (bm ? Fixed(*bm) : "n/a")
     << "\n";
  return os.str();
}

std::string CorrelationReport::FormatRecords() const {
  std::ostringstream os;
  const char* contour = kind == ContourKind::kPitch ? "pc" : "esc";
  auto emit = [&](const CorrelationCell& c, const char* type) {
    nlohmann::json j;
    j["contour"] = contour;
    j["type"] = type;
    j["language"] = c.language;
    j["cell"] = c.label;
    j["available"] = c.available;
    j["mean_cc"] = c.available ? nlohmann::json(c.mean_cc) : nlohmann::json(nullptr);
    j["pairs"] = c.pairs;
    j["skipped"] = c.skipped;
    os << j.dump() << "\n";
  };
  for (const auto& c : within_mode) emit(c, "WM");
  for (const auto& c : between_mode) emit(c, "BM");
  return os.str();
}

AccuracyReport AccuracyTable(std::span<const int> predictions, std::span<const int> labels,
                             std::span<const std::string> group_keys,
                             const std::vector<std::string>& class_names,
                             std::span<const std::string> expected_groups) {
  if (predictions.size() != labels.size() || labels.size() != group_keys.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "predictions, labels and groups differ in length");
  }
  const size_t k = class_names.size();
  AccuracyReport rep;
  rep.class_names = class_names;
  rep.confusion.assign(k, std::vector<size_t>(k, 0));
  std::map<std::string, AccuracyRow> rows;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<size_t>(labels[i]) >= k || predictions[i] < 0 ||
        static_cast<size_t>(predictions[i]) >= k) {
      throw Error(ErrorCode::kInvalidArgument, "class index out of range at item " +
                                                   std::to_string(i));
    }
    auto& row = rows[group_keys[i]];
    row.group = group_keys[i];
    ++row.total;
    const bool ok = predictions[i] == labels[i];
    row.correct += ok ? 1 : 0;
    ++rep.confusion[static_cast<size_t>(labels[i])][static_cast<size_t>(predictions[i])];
    ++rep.total;
    rep.correct += ok ? 1 : 0;
  }
  for (const auto& g : expected_groups) {
    if (!rows.count(g)) rep.notes.push_back("group " + g + " has no items; omitted");
  }
  double macro = 0.0;
  for (auto& [key, row] : rows) {
    macro += row.accuracy();
    rep.groups.push_back(row);
  }
  rep.macro_average = rows.empty() ? 0.0 : macro / static_cast<double>(rows.size());
  return rep;
}

std::string AccuracyReport::FormatText() const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "%-32s %7s %7s %9s\n", "group", "total", "correct",
                "accuracy");
  os << line;
  for (const auto& r : groups) {
    std::snprintf(line, sizeof(line), "%-32s %7zu %7zu %8s%%\n", r.group.c_str(), r.total,
                  r.correct, Fixed(100.0 * r.accuracy(), 2).c_str());
    os << line;
  }
  std::snprintf(line, sizeof(line), "%-32s %7zu %7zu %8s%%\n", "overall", total, correct,
                Fixed(100.0 * accuracy(), 2).c_str());
  os << line;
  std::snprintf(line, sizeof(line), "%-32s %7s %7s %8s%%\n", "macro-average", "-", "-",
                Fixed(100.0 * macro_average, 2).c_str());
  os << line;
  os << "confusion (rows=reference, cols=prediction)\n";
  std::snprintf(line, sizeof(line), "%-14s", "");
  os << line;
  for (const auto& c : class_names) {
    std::snprintf(line, sizeof(line), " %12s", c.c_str());
    os << line;
  }
  os << "\n";
  for (size_t i = 0; i < class_names.size(); ++i) {
    std::snprintf(line, sizeof(line), "%-14s", class_names[i].c_str());
    os << line;
    for (size_t j = 0; j < class_names.size(); ++j) {
      std::snprintf(line, sizeof(line), " %12zu", confusion[i][j]);
      os << line;
    }
    os << "\n";
  }
  for (const auto& n : notes) os << "# " << n << "\n";
  return os.str();
}

std::string AccuracyReport::FormatRecords() const {
  std::ostringstream os;
  for (const auto& r : groups) {
    nlohmann::json j{{"record", "group"}, {"group", r.group}, {"total", r.total},
                     {"correct", r.correct}, {"accuracy", r.accuracy()}};
    os << j.dump() << "\n";
  }
  nlohmann::json overall{{"record", "overall"},   {"total", total},
                         {"correct", correct},     {"accuracy", accuracy()},
                         {"macro_average", macro_average}};
  os << overall.dump() << "\n";
  nlohmann::json conf{{"record", "confusion"}, {"classes", class_names}, {"matrix", confusion}};
  os << conf.dump() << "\n";
  return os.str();
}

}  // namespace phonemode
