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

#include "phonemode/manifest.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "phonemode/error.h"

namespace phonemode {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> SplitOn(std::string_view s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (;;) {
    const size_t pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<std::string> Words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace

std::string_view ModeName(Mode m) {
  return m == Mode::kRead ? "read" : "conversation";
}

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Mode ParseMode(std::string_view token) {
  const std::string t = Lower(token);
  if (t == "read") return Mode::kRead;
  if (t == "conversation" || t == "conv") return Mode::kConversation;
  throw Error(ErrorCode::kUnknownToken, "unknown mode '" + std::string(token) + "'");
}

Split ParseSplit(std::string_view token) {
  const std::string t = Lower(token);
  if (t == "train") return Split::kTrain;
  if (t == "dev") return Split::kDev;
  if (t == "test") return Split::kTest;
  throw Error(ErrorCode::kUnknownToken, "unknown split '" + std::string(token) + "'");
}

Language ParseLanguage(std::string_view token) {
  static const char* kNamed[] = {"Telugu", "Kannada", "Odia", "Bengali"};
  const std::string t = Lower(token);
  for (const char* name : kNamed) {
    if (t == Lower(name)) return Language{name};
  }
  if (t.rfind("other:", 0) == 0 && t.size() > 6) {
    return Language{"other:" + std::string(token.substr(6))};
  }
  throw Error(ErrorCode::kUnknownToken, "unknown language '" + std::string(token) + "'");
}

std::vector<const ManifestEntry*> Manifest::Select(Split split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

Manifest ParseManifest(std::string_view text, const std::filesystem::path& base_dir) {
  Manifest m;
  size_t line_no = 0;
  for (const std::string& raw : SplitOn(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = SplitOn(line, '\t');
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != 6) {
      throw Error(ErrorCode::kParse, where + ": expected 6 tab-separated fields, got " +
                                         std::to_string(fields.size()));
    }
    ManifestEntry e;
    try {
      if (fields[0].empty()) throw Error(ErrorCode::kParse, "empty audio path");
      if (fields[3].empty()) throw Error(ErrorCode::kParse, "empty speaker id");
      e.audio_path = std::filesystem::path(fields[0]);
      if (e.audio_path.is_relative() && !base_dir.empty()) e.audio_path = base_dir / e.audio_path;
      e.language = ParseLanguage(fields[1]);
      e.mode = ParseMode(fields[2]);
      e.speaker_id = fields[3];
      e.split = ParseSplit(fields[4]);
      if (fields[5] != "-") {
        auto phones = Words(fields[5]);
        if (phones.empty()) throw Error(ErrorCode::kParse, "empty transcript (use '-')");
        e.transcript = std::move(phones);
      }
    } catch (const Error& err) {
      throw Error(err.code(), where + ": " + err.message());
    }
    m.entries.push_back(std::move(e));
  }

  std::set<std::string> train, test;
  for (const auto& e : m.entries) {
    if (e.split == Split::kTrain) train.insert(e.speaker_id);
    if (e.split == Split::kTest) test.insert(e.speaker_id);
  }
  for (const auto& s : train) {
    if (test.count(s)) {
      m.warnings.push_back("speaker '" + s + "' appears in both train and test splits");
    }
  }
  return m;
}

Manifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseManifest(ss.str(), path.parent_path());
}

std::string FormatManifest(const std::vector<ManifestEntry>& entries,
                           const std::filesystem::path& base_dir) {
  std::ostringstream out;
  out << "# audio_path\tlanguage\tmode\tspeaker_id\tsplit\ttranscript\n";
  for (const auto& e : entries) {
    std::filesystem::path p = e.audio_path;
    if (!base_dir.empty()) {
      const auto rel = p.lexically_relative(base_dir);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    out << p.generic_string() << '\t' << e.language.name << '\t' << ModeName(e.mode) << '\t'
        << e.speaker_id << '\t' << SplitName(e.split) << '\t';
    if (e.transcript) {
      for (size_t i = 0; i < e.transcript->size(); ++i) {
        out << (i ? " " : "") << (*e.transcript)[i];
      }
    } else {
      out << '-';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace phonemode
