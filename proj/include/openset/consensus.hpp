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

// Ground-truth augmentation by detector and recognizer agreement:
//
//  1. per detector, a confidence threshold at a fixed false-accept budget on
//     the validation split;
//  2. per image, clusters of above-threshold boxes from distinct detectors
//     linked by IOU >= overlap_threshold;
//  3. each cluster with enough detectors is fused (confidence-weighted
//     average, up-scaled about its center) into a new unknown face;
//  4. unknown faces on which every recognizer agrees on the same known
//     rank-1 identity receive that identity.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "openset/matching.hpp"
#include "openset/protocol.hpp"

namespace openset {

enum class BoxParameterization {
  // Average (x, y, width, height).
  OriginSize,
  // Average (left, top, right, bottom).
  Corners,
};

struct ConsensusConfig {
  std::size_t min_detectors = 3;
  double overlap_threshold = 0.25;
  std::size_t calibration_budget = 2500;
  double upscale_factor = 1.2;
  std::size_t min_agreeing_recognizers = 3;
  BoxParameterization fusion = BoxParameterization::OriginSize;

  // Throws InvalidArgument when a field is out of range.
  void validate() const;
};

using DetectorSubmissions = std::map<std::string, std::vector<DetectionRecord>>;
using RecognizerSubmissions =
    std::map<std::string, std::vector<RecognitionRecord>>;

// One above-threshold detection with its per-detector min-max normalized
// confidence in [0, 1].
struct ScoredDetection {
  std::string detector;
  DetectionRecord record;
  double normalized_confidence = 0.0;

  friend bool operator==(const ScoredDetection&,
                         const ScoredDetection&) = default;
};

struct ConsensusCluster {
  std::string image_id;
  std::vector<ScoredDetection> members;
  BoundingBox fused_box;
};

// Line-oriented provenance record of every augmentation decision.
class AuditLog {
 public:
  void add(std::string line) { lines_.push_back(std::move(line)); }
  const std::vector<std::string>& lines() const noexcept { return lines_; }
  std::string str() const;

 private:
  std::vector<std::string> lines_;
};

// Threshold per detector at `budget` false accepts on the validation split.
// Throws ValidationError naming a detector without validation detections.
std::map<std::string, double> calibrate_detectors(
    const ProtocolManifest& validation, const DetectorSubmissions& submissions,
    std::size_t budget, std::size_t min_detectors = 3, unsigned workers = 1);

// Keeps detections with confidence >= their detector's threshold and
// attaches normalized confidences. Grouped by image id; within an image,
// ordered by detector name and then input order.
std::map<std::string, std::vector<ScoredDetection>> select_confident(
    const DetectorSubmissions& submissions,
    const std::map<std::string, double>& thresholds);

// Single-link clustering over the cross-detector IOU graph of one image, at
// most one box per detector per cluster. Clusters below min_detectors
// distinct detectors are dropped. fused_box is left empty.
std::vector<ConsensusCluster> cluster_detections(
    const std::vector<ScoredDetection>& detections,
    const ConsensusConfig& config);

// Weighted average of the members' boxes (weights = normalized confidence,
// unweighted when all weights are zero) scaled by upscale_factor about its
// center. The result is an unknown face.
FaceAnnotation fuse_cluster(const ConsensusCluster& cluster,
                            const ConsensusConfig& config,
                            const std::string& day_id = {},
                            AuditLog* audit = nullptr);

struct IdentityEvidence {
  std::string recognizer;
  Candidate top;
};

struct IdentityAssignment {
  std::string image_id;
  BoundingBox box;
  IdentityLabel label;
  std::vector<IdentityEvidence> evidence;
};

// For every Unknown face of `manifest`, assigns label L >= 1 when every
// recognizer has a matched record (J >= 0.5, highest overlap) whose rank-1
// label is L. Requires at least min_agreeing_recognizers recognizers.
std::vector<IdentityAssignment> assign_identities(
    const ProtocolManifest& manifest, const RecognizerSubmissions& recognitions,
    const ConsensusConfig& config, unsigned workers = 1);

// Adds `new_faces` (skipping those with IOU >= 0.5 to a face already on the
// image) and applies `assignments` to Unknown faces. Masked and known faces
// are never relabeled; such assignments are rejected in the audit log.
ProtocolManifest augment_manifest(
    const ProtocolManifest& manifest, const std::vector<FaceAnnotation>& new_faces,
    const std::vector<IdentityAssignment>& assignments, AuditLog& audit);

struct ConsensusOutcome {
  ProtocolManifest manifest;
  AuditLog audit;
  std::map<std::string, double> thresholds;
  std::vector<ConsensusCluster> clusters;
  std::size_t faces_added = 0;
  std::size_t identities_assigned = 0;
};

// Full clean-up of `target`: calibrate on `validation`, fuse agreeing
// detections into new unknown faces, then assign identities.
ConsensusOutcome run_consensus(const ProtocolManifest& validation,
                               const DetectorSubmissions& validation_detections,
                               const ProtocolManifest& target,
                               const DetectorSubmissions& target_detections,
                               const RecognizerSubmissions& recognitions,
                               const ConsensusConfig& config,
                               unsigned workers = 1);

}  // namespace openset
