/* Copyright 2026 The openset-eval Authors. All Rights Reserved.

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
#pragma once

// File formats. All CSV files are UTF-8 with '.' as decimal separator, an
// optional version comment as first line, and a mandatory header row:
//
//   # openset-eval manifest v1 split=test
//   IMAGE_ID,DAY_ID,X,Y,WIDTH,HEIGHT,LABEL,CATEGORY
//
//   # openset-eval detections v1
//   IMAGE_ID,X,Y,WIDTH,HEIGHT,CONFIDENCE
//
//   # openset-eval recognitions v1
//   IMAGE_ID,X,Y,WIDTH,HEIGHT,LABEL_1,SCORE_1[,LABEL_k,SCORE_k...]
//
//   # openset-eval curve v1 kind=DIR denominator=15312
//   budget,threshold,count,rate,saturated
//
// A manifest row whose six face fields are all empty declares an image
// without faces. Recognition rows may carry fewer candidate pairs than the
// header; trailing empty pairs are ignored. Manifests may also be given as
// JSON (extension .json), which additionally carries the training-day map.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "openset/curves.hpp"
#include "openset/matching.hpp"
#include "openset/protocol.hpp"

namespace openset {

struct ParseWarning {
  std::size_t line = 0;
  std::string message;
};

// Shortest decimal text that parses back to exactly `value`; "inf"/"-inf"
// for infinities.
std::string format_number(double value);

// --- manifests --------------------------------------------------------------

ProtocolManifest parse_manifest_csv(std::istream& in,
                                    const std::string& source = "<stream>");
ProtocolManifest parse_manifest_json(std::istream& in,
                                     const std::string& source = "<stream>",
                                     const std::filesystem::path& base_dir = {});
// Dispatches on extension: .json -> JSON, anything else -> CSV.
ProtocolManifest read_manifest(const std::filesystem::path& path);

void write_manifest_csv(std::ostream& out, const ProtocolManifest& manifest);
void write_manifest_json(std::ostream& out, const ProtocolManifest& manifest);
void write_manifest(const std::filesystem::path& path,
                    const ProtocolManifest& manifest);

// --- submissions ------------------------------------------------------------

std::vector<DetectionRecord> parse_detections(
    std::istream& in, const std::string& source = "<stream>");
std::vector<DetectionRecord> parse_detection_file(
    const std::filesystem::path& path);

std::vector<RecognitionRecord> parse_recognitions(
    std::istream& in, const std::string& source = "<stream>",
    std::vector<ParseWarning>* warnings = nullptr);
std::vector<RecognitionRecord> parse_recognition_file(
    const std::filesystem::path& path,
    std::vector<ParseWarning>* warnings = nullptr);

void write_detections(std::ostream& out,
                      const std::vector<DetectionRecord>& records);
void write_detection_file(const std::filesystem::path& path,
                          const std::vector<DetectionRecord>& records);
void write_recognitions(std::ostream& out,
                        const std::vector<RecognitionRecord>& records);
void write_recognition_file(const std::filesystem::path& path,
                            const std::vector<RecognitionRecord>& records);

// --- reports ----------------------------------------------------------------

void write_curve_csv(std::ostream& out, const Curve& curve);
Curve parse_curve_csv(std::istream& in, const std::string& source = "<stream>");
Curve read_curve_file(const std::filesystem::path& path);

// Cells are absolute counts; '^' marks a saturated cell and '*' the best
// count of its row.
void write_summary_csv(std::ostream& out, const SummaryTable& table);

// Line chart with a log-scaled budget axis and the rate on the y axis.
void write_svg(std::ostream& out,
               const std::vector<std::pair<std::string, Curve>>& series,
               const std::string& title);

struct ReportOptions {
  // File stem prefix, e.g. "froc" -> froc_<participant>.csv.
  std::string prefix = "curve";
  bool svg = true;
  bool summary = true;
  std::string title;
};

// Writes one CSV (and SVG) per curve plus `<prefix>_summary.csv` and a joint
// `<prefix>_all.svg`. Returns the written paths in write order. Output is
// byte-identical for identical inputs.
std::vector<std::filesystem::path> emit_report(
    const std::map<std::string, Curve>& curves,
    const std::filesystem::path& destination, const ReportOptions& options);

// Writes `content` to `path`, creating parent directories. IoError on
// failure.
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace openset
