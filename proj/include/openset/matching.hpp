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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "openset/geometry.hpp"
#include "openset/protocol.hpp"

namespace openset {

inline constexpr std::size_t kMaxCandidates = 10;

struct DetectionRecord {
  std::string image_id;
  BoundingBox box;
  double confidence = 0.0;

  friend bool operator==(const DetectionRecord&,
                         const DetectionRecord&) = default;
};

struct Candidate {
  IdentityLabel label;
  double score = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// One submitted box with up to ten (label, similarity) candidates, sorted
// by descending score. Only the rank-1 candidate enters the metrics.
struct RecognitionRecord {
  std::string image_id;
  BoundingBox box;
  std::vector<Candidate> candidates;

  const Candidate& top() const { return candidates.front(); }

  friend bool operator==(const RecognitionRecord&,
                         const RecognitionRecord&) = default;
};

// Throws ValidationError unless 1..10 candidates, sorted descending, with
// distinct labels and finite scores.
void validate_candidates(const std::vector<Candidate>& candidates);

enum class NegativeTag {
  MaskedInTraining,
  MaskedNotInTraining,
  FalseAccept,
  PlainUnknown,
};

inline constexpr std::array<NegativeTag, 4> kAllNegativeTags = {
    NegativeTag::MaskedInTraining, NegativeTag::MaskedNotInTraining,
    NegativeTag::FalseAccept, NegativeTag::PlainUnknown};

std::string_view tag_name(NegativeTag tag) noexcept;
std::optional<NegativeTag> tag_from_name(std::string_view name);

// Positive and negative score multisets. All vectors are kept sorted in
// ascending order so equal partitions compare equal.
struct ScorePartition {
  std::vector<double> positives;
  std::vector<double> negatives;
  std::map<NegativeTag, std::vector<double>> tagged_negatives;
  // M for detection, N for recognition.
  std::size_t denominator = 0;

  const std::vector<double>& tagged(NegativeTag tag) const;
  void canonicalize();

  friend bool operator==(const ScorePartition&,
                         const ScorePartition&) = default;
};

// What happened to one submitted record.
enum class Disposition {
  Positive,
  Negative,
  // Overlaps some face with J >= 0.5 but lost the assignment.
  Duplicate,
  // Rank-1 label -1 on an unknown/masked face or a misdetected region.
  CorrectRejection,
  // Known face matched, rank-1 is a different known identity.
  WrongIdentity,
  // Known face matched, rank-1 label is -1.
  MissedIdentity,
};

std::string_view disposition_name(Disposition d) noexcept;

struct RecordOutcome {
  Disposition disposition = Disposition::Negative;
  std::optional<NegativeTag> tag;
  // Annotation index of the matched face.
  std::optional<std::size_t> face;
  // Highest modified Jaccard against any face of the image (0 without faces).
  double best_overlap = 0.0;
};

struct MatchDiagnostics {
  std::map<Disposition, std::size_t> counts;
  std::size_t records = 0;

  std::size_t get(Disposition d) const {
    auto it = counts.find(d);
    return it == counts.end() ? 0 : it->second;
  }
};

// Per-face assignment of records, indexed like manifest.annotations().
struct MatchResult {
  std::vector<std::optional<std::size_t>> face_to_record;
  std::vector<double> face_overlap;
  std::vector<RecordOutcome> records;
  MatchDiagnostics diagnostics;
};

struct Evaluation {
  ScorePartition partition;
  MatchResult match;
};

// Greedy one-to-one assignment within one image. Faces are visited in
// descending order of their best overlap (ties: annotation order); each
// claims its highest-overlap unclaimed record with J >= 0.5, ties broken by
// higher score, then by record order. Returns per face the record index.
std::vector<std::optional<std::size_t>> assign_records(
    std::span<const BoundingBox> faces, std::span<const BoundingBox> records,
    std::span<const double> scores);

// Builds C+/C- for the detection challenge. Denominator is M.
Evaluation evaluate_detections(const ProtocolManifest& manifest,
                               const std::vector<DetectionRecord>& detections,
                               unsigned workers = 1);

ScorePartition partition_detection_scores(
    const ProtocolManifest& manifest,
    const std::vector<DetectionRecord>& detections, unsigned workers = 1);

// Builds S+/S- (rank 1) for the identification challenge. Denominator is N.
// Masked faces are treated as -1 for matching and tagged by category.
Evaluation evaluate_recognitions(const ProtocolManifest& manifest,
                                 const std::vector<RecognitionRecord>& records,
                                 unsigned workers = 1);

ScorePartition partition_recognition_scores(
    const ProtocolManifest& manifest,
    const std::vector<RecognitionRecord>& records, unsigned workers = 1);

// Same-day / different-day positive subsets over one shared negative set.
// Denominators are the known faces captured on (or off) a training day.
struct DayPartitions {
  ScorePartition same_day;
  ScorePartition different_day;
};

DayPartitions partition_by_day(const ProtocolManifest& manifest,
                               const std::vector<RecognitionRecord>& records,
                               const Evaluation& evaluation);

}  // namespace openset
