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
#include "openset/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "openset/error.hpp"
#include "openset/parallel.hpp"

namespace openset {

void validate_candidates(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) {
    throw ValidationError("recognition record without candidates");
  }
  if (candidates.size() > kMaxCandidates) {
    throw ValidationError("recognition record with " +
                          std::to_string(candidates.size()) +
                          " candidates (at most 10 allowed)");
  }
  std::set<int> labels;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!std::isfinite(candidates[i].score)) {
      throw ValidationError("non-finite candidate score");
    }
    if (!labels.insert(candidates[i].label.value()).second) {
      throw ValidationError("duplicate candidate label " +
                            std::to_string(candidates[i].label.value()));
    }
    if (i > 0 && candidates[i].score > candidates[i - 1].score) {
      throw ValidationError("candidates not sorted by descending score");
    }
  }
}

std::string_view tag_name(NegativeTag tag) noexcept {
  switch (tag) {
    case NegativeTag::MaskedInTraining:
      return "masked_in_training";
    case NegativeTag::MaskedNotInTraining:
      return "masked_not_in_training";
    case NegativeTag::FalseAccept:
      return "false_accept";
    case NegativeTag::PlainUnknown:
      return "unknown";
  }
  return "?";
}

std::optional<NegativeTag> tag_from_name(std::string_view name) {
  for (NegativeTag t : kAllNegativeTags) {
    if (tag_name(t) == name) return t;
  }
  return std::nullopt;
}

std::string_view disposition_name(Disposition d) noexcept {
  switch (d) {
    case Disposition::Positive:
      return "positive";
    case Disposition::Negative:
      return "negative";
    case Disposition::Duplicate:
      return "duplicate";
    case Disposition::CorrectRejection:
      return "correct_rejection";
    case Disposition::WrongIdentity:
      return "wrong_identity";
    case Disposition::MissedIdentity:
      return "missed_identity";
  }
  return "?";
}

const std::vector<double>& ScorePartition::tagged(NegativeTag tag) const {
  static const std::vector<double> kEmpty;
  auto it = tagged_negatives.find(tag);
  return it == tagged_negatives.end() ? kEmpty : it->second;
}

void ScorePartition::canonicalize() {
  std::sort(positives.begin(), positives.end());
  std::sort(negatives.begin(), negatives.end());
  for (auto it = tagged_negatives.begin(); it != tagged_negatives.end();) {
    if (it->second.empty()) {
      it = tagged_negatives.erase(it);
    } else {
      std::sort(it->second.begin(), it->second.end());
      ++it;
    }
  }
}

std::vector<std::optional<std::size_t>> assign_records(
    std::span<const BoundingBox> faces, std::span<const BoundingBox> records,
    std::span<const double> scores) {
  const std::size_t nf = faces.size();
  const std::size_t nr = records.size();
  std::vector<double> overlap(nf * nr);
  std::vector<double> best(nf, 0.0);
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t r = 0; r < nr; ++r) {
      const double j = modified_jaccard(faces[f], records[r]);
      overlap[f * nr + r] = j;
      best[f] = std::max(best[f], j);
    }
  }

  std::vector<std::size_t> order(nf);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return best[a] > best[b];
  });

  std::vector<std::optional<std::size_t>> assigned(nf);
  std::vector<bool> claimed(nr, false);
  for (std::size_t f : order) {
    if (best[f] < kOverlapAcceptance) break;
    std::optional<std::size_t> pick;
    for (std::size_t r = 0; r < nr; ++r) {
      const double j = overlap[f * nr + r];
      if (claimed[r] || j < kOverlapAcceptance) continue;
      if (!pick) {
        pick = r;
        continue;
      }
      const double pj = overlap[f * nr + *pick];
      if (j > pj || (j == pj && scores[r] > scores[*pick])) pick = r;
    }
    if (pick) {
      claimed[*pick] = true;
      assigned[f] = pick;
    }
  }
  return assigned;
}

namespace {

// Per-image view used by both challenges.
struct ImageWork {
  const std::string* image_id = nullptr;
  std::vector<std::size_t> records;  // global record indices, input order
};

template <typename Record>
std::vector<ImageWork> group_by_image(const ProtocolManifest& manifest,
                                      const std::vector<Record>& records) {
  std::map<std::string_view, std::size_t> slot;
  std::vector<ImageWork> work;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string& id = records[i].image_id;
    if (!manifest.has_image(id)) {
      throw ValidationError("record " + std::to_string(i + 1) +
                            " references image '" + id +
                            "' which is not in the manifest");
    }
    auto [it, inserted] = slot.emplace(id, work.size());
    if (inserted) work.push_back({&id, {}});
    work[it->second].records.push_back(i);
  }
  std::sort(work.begin(), work.end(), [](const ImageWork& a, const ImageWork& b) {
    return *a.image_id < *b.image_id;
  });
  return work;
}

// Assigns records to faces on every image. `score_of` yields the tie-break
// score (confidence or rank-1 similarity); `classify` fills the outcome of
// each record given its matched face (if any).
template <typename Record, typename ScoreOf>
MatchResult match_all(const ProtocolManifest& manifest,
                      const std::vector<Record>& records, unsigned workers,
                      ScoreOf score_of) {
  const std::vector<ImageWork> work = group_by_image(manifest, records);
  MatchResult result;
  result.face_to_record.assign(manifest.total_faces(), std::nullopt);
  result.face_overlap.assign(manifest.total_faces(), 0.0);
  result.records.assign(records.size(), RecordOutcome{});

  struct ImageResult {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // face, record
    std::vector<std::pair<std::size_t, double>> face_overlap;
    std::vector<double> record_best;
  };
  std::vector<ImageResult> per_image(work.size());

  parallel_for(work.size(), workers, [&](std::size_t w) {
    const ImageWork& item = work[w];
    const auto& face_idx = manifest.faces_in(*item.image_id);
    std::vector<BoundingBox> faces;
    faces.reserve(face_idx.size());
    for (std::size_t f : face_idx) faces.push_back(manifest.annotations()[f].box);
    std::vector<BoundingBox> boxes;
    std::vector<double> scores;
    boxes.reserve(item.records.size());
    scores.reserve(item.records.size());
    for (std::size_t r : item.records) {
      boxes.push_back(records[r].box);
      scores.push_back(score_of(records[r]));
    }
    const auto assigned = assign_records(faces, boxes, scores);

    ImageResult& out = per_image[w];
    out.record_best.assign(boxes.size(), 0.0);
    for (std::size_t f = 0; f < faces.size(); ++f) {
      for (std::size_t r = 0; r < boxes.size(); ++r) {
        out.record_best[r] =
            std::max(out.record_best[r], modified_jaccard(faces[f], boxes[r]));
      }
      if (assigned[f]) {
        out.pairs.emplace_back(face_idx[f], item.records[*assigned[f]]);
        out.face_overlap.emplace_back(
            face_idx[f], modified_jaccard(faces[f], boxes[*assigned[f]]));
      }
    }
  });

  for (std::size_t w = 0; w < work.size(); ++w) {
    const ImageResult& img = per_image[w];
    for (std::size_t r = 0; r < work[w].records.size(); ++r) {
      result.records[work[w].records[r]].best_overlap = img.record_best[r];
    }
    for (auto [face, record] : img.pairs) {
      result.face_to_record[face] = record;
      result.records[record].face = face;
    }
    for (auto [face, j] : img.face_overlap) result.face_overlap[face] = j;
  }
  return result;
}

void finish(Evaluation& eval) {
  auto& diag = eval.match.diagnostics;
  diag.records = eval.match.records.size();
  for (const auto& outcome : eval.match.records) ++diag.counts[outcome.disposition];
  eval.partition.canonicalize();
}

}  // namespace

Evaluation evaluate_detections(const ProtocolManifest& manifest,
                               const std::vector<DetectionRecord>& detections,
                               unsigned workers) {
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (!std::isfinite(detections[i].confidence)) {
      throw ValidationError("detection " + std::to_string(i + 1) +
                            " has a non-finite confidence");
    }
    if (!detections[i].box.valid()) {
      throw ValidationError("detection " + std::to_string(i + 1) +
                            " has an invalid box");
    }
  }
  Evaluation eval;
  eval.match = match_all(manifest, detections, workers,
                         [](const DetectionRecord& d) { return d.confidence; });
  eval.partition.denominator = manifest.total_faces();
  for (std::size_t i = 0; i < detections.size(); ++i) {
    RecordOutcome& out = eval.match.records[i];
    const double c = detections[i].confidence;
    if (out.face) {
      out.disposition = Disposition::Positive;
      eval.partition.positives.push_back(c);
    } else if (out.best_overlap >= kOverlapAcceptance) {
      out.disposition = Disposition::Duplicate;
    } else {
      out.disposition = Disposition::Negative;
      out.tag = NegativeTag::FalseAccept;
      eval.partition.negatives.push_back(c);
      eval.partition.tagged_negatives[NegativeTag::FalseAccept].push_back(c);
    }
  }
  finish(eval);
  return eval;
}

ScorePartition partition_detection_scores(
    const ProtocolManifest& manifest,
    const std::vector<DetectionRecord>& detections, unsigned workers) {
  return evaluate_detections(manifest, detections, workers).partition;
}

namespace {

NegativeTag tag_for(MaskingCategory category) {
  switch (category) {
    case MaskingCategory::MaskedInTraining:
      return NegativeTag::MaskedInTraining;
    case MaskingCategory::MaskedNotInTraining:
      return NegativeTag::MaskedNotInTraining;
    default:
      return NegativeTag::PlainUnknown;
  }
}

}  // namespace

Evaluation evaluate_recognitions(const ProtocolManifest& manifest,
                                 const std::vector<RecognitionRecord>& records,
                                 unsigned workers) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      validate_candidates(records[i].candidates);
    } catch (const ValidationError& e) {
      throw ValidationError("recognition record " + std::to_string(i + 1) +
                            ": " + e.what());
    }
    if (!records[i].box.valid()) {
      throw ValidationError("recognition record " + std::to_string(i + 1) +
                            " has an invalid box");
    }
  }
  Evaluation eval;
  eval.match = match_all(manifest, records, workers,
                         [](const RecognitionRecord& r) { return r.top().score; });
  eval.partition.denominator = manifest.known_faces();
  auto add_negative = [&](RecordOutcome& out, NegativeTag tag, double s) {
    out.disposition = Disposition::Negative;
    out.tag = tag;
    eval.partition.negatives.push_back(s);
    eval.partition.tagged_negatives[tag].push_back(s);
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    RecordOutcome& out = eval.match.records[i];
    const Candidate& top = records[i].top();
    if (out.face) {
      const FaceAnnotation& face = manifest.annotations()[*out.face];
      if (face.category == MaskingCategory::Known) {
        if (top.label == face.label) {
          out.disposition = Disposition::Positive;
          eval.partition.positives.push_back(top.score);
        } else if (top.label.is_known()) {
          out.disposition = Disposition::WrongIdentity;
        } else {
          out.disposition = Disposition::MissedIdentity;
        }
      } else if (top.label.is_known()) {
        add_negative(out, tag_for(face.category), top.score);
      } else {
        out.disposition = Disposition::CorrectRejection;
      }
    } else if (out.best_overlap >= kOverlapAcceptance) {
      out.disposition = Disposition::Duplicate;
    } else if (top.label.is_known()) {
      add_negative(out, NegativeTag::FalseAccept, top.score);
    } else {
      out.disposition = Disposition::CorrectRejection;
    }
  }
  finish(eval);
  return eval;
}

ScorePartition partition_recognition_scores(
    const ProtocolManifest& manifest,
    const std::vector<RecognitionRecord>& records, unsigned workers) {
  return evaluate_recognitions(manifest, records, workers).partition;
}

DayPartitions partition_by_day(const ProtocolManifest& manifest,
                               const std::vector<RecognitionRecord>& records,
                               const Evaluation& evaluation) {
  DayPartitions out;
  for (auto* p : {&out.same_day, &out.different_day}) {
    p->negatives = evaluation.partition.negatives;
    p->tagged_negatives = evaluation.partition.tagged_negatives;
  }
  for (const auto& face : manifest.annotations()) {
    if (face.category != MaskingCategory::Known) continue;
    ++(is_same_day(manifest, face) ? out.same_day : out.different_day)
          .denominator;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RecordOutcome& o = evaluation.match.records[i];
    if (o.disposition != Disposition::Positive) continue;
    const FaceAnnotation& face = manifest.annotations()[*o.face];
    (is_same_day(manifest, face) ? out.same_day : out.different_day)
        .positives.push_back(records[i].top().score);
  }
  out.same_day.canonicalize();
  out.different_day.canonicalize();
  return out;
}

}  // namespace openset
