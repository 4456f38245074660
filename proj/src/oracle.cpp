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
#include "openset/oracle.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

namespace openset::oracle {

namespace {

struct Corners {
  double x1, y1, x2, y2;
};

Corners corners(const BoundingBox& b) {
  return {b.x, b.y, b.x + b.width, b.y + b.height};
}

double overlap_area(const BoundingBox& a, const BoundingBox& b) {
  const Corners p = corners(a);
  const Corners q = corners(b);
  const double left = p.x1 > q.x1 ? p.x1 : q.x1;
  const double right = p.x2 < q.x2 ? p.x2 : q.x2;
  const double top = p.y1 > q.y1 ? p.y1 : q.y1;
  const double bottom = p.y2 < q.y2 ? p.y2 : q.y2;
  if (!(right > left) || !(bottom > top)) return 0.0;
  return (right - left) * (bottom - top);
}

// Everything the naive matcher needs from either record type.
struct Item {
  const std::string* image;
  BoundingBox box;
  double score;
};

// For each record: the face index it was assigned to, or -1.
std::vector<long> naive_assign(const ProtocolManifest& manifest,
                               const std::vector<Item>& items) {
  const auto& faces = manifest.annotations();
  std::vector<long> owner(items.size(), -1);
  std::set<std::string> images;
  for (const auto& it : items) images.insert(*it.image);

  for (const auto& image : images) {
    std::vector<std::size_t> fs, rs;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].image_id == image) fs.push_back(f);
    }
    for (std::size_t r = 0; r < items.size(); ++r) {
      if (*items[r].image == image) rs.push_back(r);
    }
    std::vector<bool> done(fs.size(), false);
    std::vector<bool> taken(rs.size(), false);
    for (std::size_t round = 0; round < fs.size(); ++round) {
      // Unprocessed face with the largest best overlap; lowest index on ties.
      long chosen = -1;
      double chosen_best = -1.0;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        if (done[i]) continue;
        double best = 0.0;
        for (std::size_t j = 0; j < rs.size(); ++j) {
          const double v = overlap(faces[fs[i]].box, items[rs[j]].box);
          if (v > best) best = v;
        }
        if (best > chosen_best) {
          chosen = static_cast<long>(i);
          chosen_best = best;
        }
      }
      done[chosen] = true;
      if (chosen_best < 0.5) continue;
      long pick = -1;
      double pick_j = 0.0, pick_s = 0.0;
      for (std::size_t j = 0; j < rs.size(); ++j) {
        if (taken[j]) continue;
        const double v = overlap(faces[fs[chosen]].box, items[rs[j]].box);
        if (v < 0.5) continue;
        const double s = items[rs[j]].score;
        const bool better = pick < 0 || v > pick_j || (v == pick_j && s > pick_s);
        if (better) {
          pick = static_cast<long>(j);
          pick_j = v;
          pick_s = s;
        }
      }
      if (pick >= 0) {
        taken[pick] = true;
        owner[rs[pick]] = static_cast<long>(fs[chosen]);
      }
    }
  }
  return owner;
}

bool overlaps_any_face(const ProtocolManifest& manifest, const Item& item) {
  for (const auto& face : manifest.annotations()) {
    if (face.image_id == *item.image && overlap(face.box, item.box) >= 0.5) {
      return true;
    }
  }
  return false;
}

void sort_all(ScorePartition& p) {
  std::sort(p.positives.begin(), p.positives.end());
  std::sort(p.negatives.begin(), p.negatives.end());
  for (auto& [tag, v] : p.tagged_negatives) std::sort(v.begin(), v.end());
}

}  // namespace

double overlap(const BoundingBox& gt, const BoundingBox& det) {
  const double inter = overlap_area(gt, det);
  if (inter == 0.0) return 0.0;
  const double g = gt.width * gt.height;
  const double d = det.width * det.height;
  const double relaxed = g / 4 > inter ? g / 4 : inter;
  const double j = inter / (relaxed + d - inter);
  return j > 1.0 ? 1.0 : j;
}

double plain_iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = overlap_area(a, b);
  if (inter == 0.0) return 0.0;
  return inter / (a.width * a.height + b.width * b.height - inter);
}

ScorePartition match_detections(const ProtocolManifest& manifest,
                                const std::vector<DetectionRecord>& records) {
  std::vector<Item> items;
  for (const auto& r : records) items.push_back({&r.image_id, r.box, r.confidence});
  const auto owner = naive_assign(manifest, items);

  ScorePartition p;
  p.denominator = manifest.annotations().size();
  for (std::size_t r = 0; r < items.size(); ++r) {
    if (owner[r] >= 0) {
      p.positives.push_back(items[r].score);
    } else if (!overlaps_any_face(manifest, items[r])) {
      p.negatives.push_back(items[r].score);
      p.tagged_negatives[NegativeTag::FalseAccept].push_back(items[r].score);
    }
  }
  sort_all(p);
  return p;
}

ScorePartition match_recognitions(const ProtocolManifest& manifest,
                                  const std::vector<RecognitionRecord>& records) {
  std::vector<Item> items;
  for (const auto& r : records) {
    items.push_back({&r.image_id, r.box, r.candidates.front().score});
  }
  const auto owner = naive_assign(manifest, items);

  ScorePartition p;
  for (const auto& face : manifest.annotations()) {
    if (face.category == MaskingCategory::Known) ++p.denominator;
  }
  auto negative = [&](NegativeTag tag, double s) {
    p.negatives.push_back(s);
    p.tagged_negatives[tag].push_back(s);
  };
  for (std::size_t r = 0; r < items.size(); ++r) {
    const int top = records[r].candidates.front().label.value();
    const double s = items[r].score;
    if (owner[r] >= 0) {
      const FaceAnnotation& face = manifest.annotations()[owner[r]];
      switch (face.category) {
        case MaskingCategory::Known:
          if (top == face.label.value()) p.positives.push_back(s);
          break;
        case MaskingCategory::Unknown:
          if (top != -1) negative(NegativeTag::PlainUnknown, s);
          break;
        case MaskingCategory::MaskedInTraining:
          if (top != -1) negative(NegativeTag::MaskedInTraining, s);
          break;
        case MaskingCategory::MaskedNotInTraining:
          if (top != -1) negative(NegativeTag::MaskedNotInTraining, s);
          break;
      }
    } else if (!overlaps_any_face(manifest, items[r]) && top != -1) {
      negative(NegativeTag::FalseAccept, s);
    }
  }
  sort_all(p);
  return p;
}

Curve curve(const ScorePartition& partition,
            std::span<const std::size_t> budgets, CurveKind kind) {
  std::vector<double> values = partition.positives;
  values.insert(values.end(), partition.negatives.begin(),
                partition.negatives.end());
  values.push_back(std::numeric_limits<double>::infinity());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // Counts at every candidate threshold, by direct enumeration.
  std::vector<std::size_t> neg_at(values.size()), pos_at(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (double n : partition.negatives) neg_at[i] += n >= values[i] ? 1 : 0;
    for (double q : partition.positives) pos_at[i] += q >= values[i] ? 1 : 0;
  }

  Curve out{kind, {}, partition.denominator};
  for (std::size_t budget : budgets) {
    OperatingPoint p;
    p.budget = budget;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (neg_at[i] < budget) {
        p.threshold = values[i];
        p.positive_count = pos_at[i];
        p.negative_count = neg_at[i];
        break;
      }
    }
    p.saturated = partition.negatives.size() < budget;
    if (partition.denominator > 0) {
      p.rate = static_cast<double>(p.positive_count) /
               static_cast<double>(partition.denominator);
    }
    out.points.push_back(p);
  }
  return out;
}

Curve rejection_curve(const ScorePartition& partition, NegativeTag tag,
                      std::span<const std::size_t> grid) {
  const auto it = partition.tagged_negatives.find(tag);
  const std::vector<double> subset =
      it == partition.tagged_negatives.end() ? std::vector<double>{} : it->second;
  std::vector<double> ranked = partition.positives;
  std::sort(ranked.begin(), ranked.end(), [](double a, double b) { return a > b; });

  Curve out{CurveKind::CRR, {}, subset.size()};
  for (std::size_t k : grid) {
    OperatingPoint p;
    p.budget = k;
    p.saturated = k > ranked.size();
    if (!ranked.empty()) p.threshold = ranked[(k < ranked.size() ? k : ranked.size()) - 1];
    std::size_t rejected = 0;
    for (double s : subset) rejected += s < p.threshold ? 1 : 0;
    for (double s : ranked) p.positive_count += s >= p.threshold ? 1 : 0;
    p.negative_count = subset.size() - rejected;
    if (!subset.empty()) {
      p.rate = static_cast<double>(rejected) / static_cast<double>(subset.size());
    }
    out.points.push_back(p);
  }
  return out;
}

}  // namespace openset::oracle
