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
#include "openset/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "openset/curves.hpp"
#include "openset/error.hpp"
#include "openset/io.hpp"

namespace openset {

namespace {

std::string box_text(const BoundingBox& b) {
  return format_number(b.x) + "," + format_number(b.y) + "," +
         format_number(b.width) + "," + format_number(b.height);
}

}  // namespace

void ConsensusConfig::validate() const {
  if (min_detectors < 2) throw InvalidArgument("min_detectors must be >= 2");
  if (!(overlap_threshold > 0.0 && overlap_threshold <= 1.0)) {
    throw InvalidArgument("overlap_threshold must be in (0, 1]");
  }
  if (calibration_budget == 0) {
    throw InvalidArgument("calibration_budget must be >= 1");
  }
  if (!(upscale_factor >= 1.0) || !std::isfinite(upscale_factor)) {
    throw InvalidArgument("upscale_factor must be >= 1");
  }
  if (min_agreeing_recognizers < 1) {
    throw InvalidArgument("min_agreeing_recognizers must be >= 1");
  }
}

std::string AuditLog::str() const {
  std::string out;
  for (const auto& line : lines_) {
    out += line;
    out += '\n';
  }
  return out;
}

std::map<std::string, double> calibrate_detectors(
    const ProtocolManifest& validation, const DetectorSubmissions& submissions,
    std::size_t budget, std::size_t min_detectors, unsigned workers) {
  if (submissions.size() < min_detectors) {
    throw InvalidArgument("calibration needs at least " +
                          std::to_string(min_detectors) + " detectors, got " +
                          std::to_string(submissions.size()));
  }
  std::map<std::string, double> thresholds;
  for (const auto& [name, records] : submissions) {
    if (records.empty()) {
      throw ValidationError("detector '" + name +
                            "' has no validation detections");
    }
    const ScorePartition p =
        partition_detection_scores(validation, records, workers);
    std::vector<double> candidates = p.positives;
    candidates.insert(candidates.end(), p.negatives.begin(), p.negatives.end());
    thresholds[name] = calibrate_threshold(p.negatives, budget, candidates);
  }
  return thresholds;
}

std::map<std::string, std::vector<ScoredDetection>> select_confident(
    const DetectorSubmissions& submissions,
    const std::map<std::string, double>& thresholds) {
  std::map<std::string, std::vector<ScoredDetection>> by_image;
  for (const auto& [name, records] : submissions) {
    auto t = thresholds.find(name);
    if (t == thresholds.end()) {
      throw ValidationError("detector '" + name + "' has no calibrated threshold");
    }
    std::vector<const DetectionRecord*> kept;
    double lo = kInfinity, hi = -kInfinity;
    for (const auto& r : records) {
      if (r.confidence >= t->second) {
        kept.push_back(&r);
        lo = std::min(lo, r.confidence);
        hi = std::max(hi, r.confidence);
      }
    }
    for (const DetectionRecord* r : kept) {
      const double norm = hi > lo ? (r->confidence - lo) / (hi - lo) : 1.0;
      by_image[r->image_id].push_back({name, *r, norm});
    }
  }
  return by_image;
}

std::vector<ConsensusCluster> cluster_detections(
    const std::vector<ScoredDetection>& detections,
    const ConsensusConfig& config) {
  config.validate();
  const std::size_t n = detections.size();
  std::vector<std::size_t> seeds(n);
  std::iota(seeds.begin(), seeds.end(), 0);
  std::stable_sort(seeds.begin(), seeds.end(), [&](std::size_t a, std::size_t b) {
    const auto& da = detections[a];
    const auto& db = detections[b];
    if (da.normalized_confidence != db.normalized_confidence) {
      return da.normalized_confidence > db.normalized_confidence;
    }
    return da.detector < db.detector;
  });
  std::set<std::string> detector_names;
  for (const auto& d : detections) detector_names.insert(d.detector);

  std::vector<bool> used(n, false);
  std::vector<ConsensusCluster> clusters;
  for (std::size_t seed : seeds) {
    if (used[seed]) continue;
    std::vector<std::size_t> members{seed};
    std::set<std::string> present{detections[seed].detector};
    used[seed] = true;
    for (bool grew = true; grew;) {
      grew = false;
      for (const auto& name : detector_names) {
        if (present.count(name)) continue;
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < n; ++i) {
          if (used[i] || detections[i].detector != name) continue;
          const bool linked = std::any_of(members.begin(), members.end(), [&](std::size_t m) {
            return iou(detections[m].record.box, detections[i].record.box) >=
                   config.overlap_threshold;
          });
          if (!linked) continue;
          if (!pick ||
              detections[i].record.confidence > detections[*pick].record.confidence) {
            pick = i;
          }
        }
        if (pick) {
          members.push_back(*pick);
          present.insert(name);
          used[*pick] = true;
          grew = true;
        }
      }
    }
    if (present.size() < config.min_detectors) {
      // Only the seed is consumed; the other boxes may still join a cluster.
      for (std::size_t m = 1; m < members.size(); ++m) used[members[m]] = false;
      continue;
    }
    ConsensusCluster cluster;
    cluster.image_id = detections[seed].record.image_id;
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return detections[a].detector < detections[b].detector;
    });
    for (std::size_t m : members) cluster.members.push_back(detections[m]);
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

FaceAnnotation fuse_cluster(const ConsensusCluster& cluster,
                            const ConsensusConfig& config,
                            const std::string& day_id, AuditLog* audit) {
  if (cluster.members.empty()) throw InvalidArgument("empty consensus cluster");
  double total = 0.0;
  for (const auto& m : cluster.members) total += m.normalized_confidence;
  const bool unweighted = !(total > 0.0);
  if (unweighted && audit) {
    audit->add("FUSE-UNWEIGHTED image=" + cluster.image_id +
               " reason=all-weights-zero");
  }
  const double weight_sum =
      unweighted ? static_cast<double>(cluster.members.size()) : total;

  // Offsets from the first member keep the average exact for identical boxes.
  const auto params = [&](const BoundingBox& b) -> std::array<double, 4> {
    if (config.fusion == BoxParameterization::Corners) {
      return {b.x, b.y, b.right(), b.bottom()};
    }
    return {b.x, b.y, b.width, b.height};
  };
  const auto ref = params(cluster.members.front().record.box);
  std::array<double, 4> acc{};
  for (const auto& m : cluster.members) {
    const double w = unweighted ? 1.0 : m.normalized_confidence;
    const auto p = params(m.record.box);
    for (std::size_t k = 0; k < 4; ++k) acc[k] += w * (p[k] - ref[k]);
  }
  std::array<double, 4> mean{};
  for (std::size_t k = 0; k < 4; ++k) mean[k] = ref[k] + acc[k] / weight_sum;
  BoundingBox fused =
      config.fusion == BoxParameterization::Corners
          ? BoundingBox{mean[0], mean[1], mean[2] - mean[0], mean[3] - mean[1]}
          : BoundingBox{mean[0], mean[1], mean[2], mean[3]};
  fused = scale_about_center(fused, config.upscale_factor);

  FaceAnnotation face;
  face.image_id = cluster.image_id;
  face.day_id = day_id;
  face.box = fused;
  face.label = IdentityLabel::unknown();
  face.category = MaskingCategory::Unknown;
  return face;
}

std::vector<IdentityAssignment> assign_identities(
    const ProtocolManifest& manifest, const RecognizerSubmissions& recognitions,
    const ConsensusConfig& config, unsigned workers) {
  config.validate();
  if (recognitions.size() < config.min_agreeing_recognizers) {
    throw InvalidArgument("identity assignment needs at least " +
                          std::to_string(config.min_agreeing_recognizers) +
                          " recognizers, got " +
                          std::to_string(recognitions.size()));
  }
  std::vector<std::pair<std::string, Evaluation>> matched;
  for (const auto& [name, records] : recognitions) {
    matched.emplace_back(name, evaluate_recognitions(manifest, records, workers));
  }

  std::vector<IdentityAssignment> out;
  const auto& faces = manifest.annotations();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (faces[f].category != MaskingCategory::Unknown) continue;
    IdentityAssignment a{faces[f].image_id, faces[f].box, IdentityLabel{}, {}};
    bool unanimous = true;
    for (const auto& [name, eval] : matched) {
      const auto& record = eval.match.face_to_record[f];
      if (!record) {
        unanimous = false;
        break;
      }
      const Candidate& top = recognitions.at(name)[*record].top();
      if (!top.label.is_known() ||
          (!a.evidence.empty() && top.label != a.evidence.front().top.label)) {
        unanimous = false;
        break;
      }
      a.evidence.push_back({name, top});
    }
    if (!unanimous) continue;
    a.label = a.evidence.front().top.label;
    out.push_back(std::move(a));
  }
  return out;
}

ProtocolManifest augment_manifest(
    const ProtocolManifest& manifest, const std::vector<FaceAnnotation>& new_faces,
    const std::vector<IdentityAssignment>& assignments, AuditLog& audit) {
  std::vector<FaceAnnotation> faces = manifest.annotations();
  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < faces.size(); ++i) by_image[faces[i].image_id].push_back(i);

  for (const FaceAnnotation& candidate : new_faces) {
    if (!manifest.has_image(candidate.image_id)) {
      throw ValidationError("new face references image '" + candidate.image_id +
                            "' which is not in the manifest");
    }
    double worst = 0.0;
    for (std::size_t i : by_image[candidate.image_id]) {
      worst = std::max(worst, iou(faces[i].box, candidate.box));
    }
    if (worst >= kOverlapAcceptance) {
      audit.add("SKIP image=" + candidate.image_id + " box=" +
                box_text(candidate.box) + " reason=duplicate iou=" +
                format_number(worst));
      continue;
    }
    FaceAnnotation face = candidate;
    face.day_id = manifest.images().at(candidate.image_id);
    face.label = IdentityLabel::unknown();
    face.category = MaskingCategory::Unknown;
    by_image[face.image_id].push_back(faces.size());
    faces.push_back(std::move(face));
  }

  for (const IdentityAssignment& a : assignments) {
    std::optional<std::size_t> target;
    for (std::size_t i : by_image[a.image_id]) {
      if (faces[i].box == a.box) target = i;
    }
    const std::string where = "image=" + a.image_id + " box=" + box_text(a.box) +
                              " label=" + std::to_string(a.label.value());
    if (!target) {
      audit.add("REJECT " + where + " reason=no-such-face");
      continue;
    }
    FaceAnnotation& face = faces[*target];
    if (!a.label.is_known()) {
      audit.add("REJECT " + where + " reason=not-a-known-identity");
    } else if (is_masked(face.category)) {
      audit.add("REJECT " + where + " reason=masked-face");
    } else if (face.category == MaskingCategory::Known) {
      audit.add("REJECT " + where + " reason=already-known");
    } else {
      face.label = a.label;
      face.category = MaskingCategory::Known;
      std::string evidence;
      for (const auto& e : a.evidence) {
        if (!evidence.empty()) evidence += ';';
        evidence += e.recognizer + ":" + std::to_string(e.top.label.value()) +
                    "@" + format_number(e.top.score);
      }
      audit.add("ASSIGN " + where + " evidence=" + evidence);
    }
  }
  return ProtocolManifest(manifest.split(), std::move(faces), manifest.images(),
                          manifest.training_days());
}

ConsensusOutcome run_consensus(const ProtocolManifest& validation,
                               const DetectorSubmissions& validation_detections,
                               const ProtocolManifest& target,
                               const DetectorSubmissions& target_detections,
                               const RecognizerSubmissions& recognitions,
                               const ConsensusConfig& config, unsigned workers) {
  config.validate();
  for (const auto& [name, records] : target_detections) {
    auto it = validation_detections.find(name);
    if (it == validation_detections.end() || it->second.empty()) {
      throw ValidationError("detector '" + name +
                            "' has no validation submission");
    }
  }
  ConsensusOutcome out;
  out.thresholds = calibrate_detectors(validation, validation_detections,
                                       config.calibration_budget,
                                       config.min_detectors, workers);
  for (const auto& [name, threshold] : out.thresholds) {
    out.audit.add("THRESHOLD detector=" + name + " value=" + format_number(threshold));
  }

  DetectorSubmissions used;
  for (const auto& [name, records] : target_detections) used[name] = records;
  const auto confident = select_confident(used, out.thresholds);

  std::vector<FaceAnnotation> new_faces;
  std::size_t before = target.total_faces();
  for (const auto& [image, detections] : confident) {
    if (!target.has_image(image)) {
      throw ValidationError("detection references image '" + image +
                            "' which is not in the manifest");
    }
    for (ConsensusCluster& c : cluster_detections(detections, config)) {
      FaceAnnotation face =
          fuse_cluster(c, config, target.images().at(image), &out.audit);
      c.fused_box = face.box;
      std::string members;
      for (const auto& m : c.members) {
        if (!members.empty()) members += ';';
        members += m.detector + ":" + format_number(m.record.confidence) + "/" +
                   format_number(m.normalized_confidence);
      }
      out.audit.add("CANDIDATE image=" + image + " box=" + box_text(face.box) +
                    " members=" + members);
      new_faces.push_back(std::move(face));
      out.clusters.push_back(std::move(c));
    }
  }
  ProtocolManifest added = augment_manifest(target, new_faces, {}, out.audit);
  out.faces_added = added.total_faces() - before;
  for (std::size_t i = before; i < added.total_faces(); ++i) {
    const auto& f = added.annotations()[i];
    out.audit.add("ADD image=" + f.image_id + " box=" + box_text(f.box));
  }

  std::vector<IdentityAssignment> assignments;
  if (recognitions.empty()) {
    out.audit.add("NOTE identity assignment skipped: no recognizers");
  } else {
    assignments = assign_identities(added, recognitions, config, workers);
  }
  const std::size_t known_before = added.known_faces();
  out.manifest = augment_manifest(added, {}, assignments, out.audit);
  out.identities_assigned = out.manifest.known_faces() - known_before;
  return out;
}

}  // namespace openset
