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

// Seeded synthetic challenges: ground truth for a train / validation / test
// protocol plus detector and recognizer submissions whose true status is
// recorded per record. All coordinates are whole pixels.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "openset/consensus.hpp"
#include "openset/matching.hpp"
#include "openset/protocol.hpp"

namespace openset {

struct DetectorModel {
  std::string name = "detector";
  double miss_rate = 0.1;
  // Mean of a Poisson count of boxes placed away from every face.
  double false_accepts_per_image = 1.0;
  // Box offset as a fraction of the face size (uniform in +-jitter).
  double jitter = 0.0;
  // Detected side length as a fraction of the ground-truth side.
  double shrink_min = 0.5;
  double shrink_max = 1.0;
  // Probability of a second box on an already detected face.
  double duplicate_rate = 0.0;
  double true_mean = 2.0;
  double true_stddev = 1.0;
  double false_mean = 0.0;
  double false_stddev = 1.0;
};

struct RecognizerModel {
  std::string name = "recognizer";
  // Index into ScenarioSpec::detectors whose boxes this recognizer labels.
  std::size_t detector = 0;
  double rank1_accuracy = 0.8;
  // Probability of answering -1 on an unknown or masked face.
  double unknown_rejection = 0.7;
  // Probability of answering -1 on a box that holds no labeled face.
  double false_accept_rejection = 0.7;
  double correct_mean = 0.8;
  double correct_stddev = 0.1;
  double incorrect_mean = 0.4;
  double incorrect_stddev = 0.15;
  std::size_t candidates = 5;
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  std::size_t image_count = 20;
  std::size_t faces_min = 1;
  std::size_t faces_max = 6;
  double known_fraction = 0.4;
  double masked_in_training_fraction = 0.05;
  double masked_not_in_training_fraction = 0.1;
  std::size_t known_identities = 40;
  std::size_t masked_identities = 10;
  std::size_t day_count = 5;
  // Fraction of known validation/test faces taken on a non-training day.
  double different_day_fraction = 0.3;
  // Faces withheld from the ground truth but visible to detectors.
  double unlabeled_fraction = 0.0;
  // Allow overlapping and nested faces.
  bool crowded = false;
  int image_width = 1024;
  int image_height = 768;
  int face_min_size = 24;
  int face_max_size = 96;
  std::vector<DetectorModel> detectors{DetectorModel{}};
  std::vector<RecognizerModel> recognizers{RecognizerModel{}};

  // Throws InvalidArgument for degenerate or out-of-range settings.
  void validate() const;
};

// Intended status of a generated record, known to the generator.
struct RecordTruth {
  // Annotation index of the labeled face the record was drawn from.
  std::optional<std::size_t> face;
  // Drawn from a face withheld from the ground truth.
  std::optional<std::size_t> hidden_face;
  bool duplicate = false;
};

struct SplitData {
  ProtocolManifest manifest;
  // Faces removed from the manifest (unknown identity unless `label` set).
  std::vector<FaceAnnotation> hidden_faces;
  DetectorSubmissions detections;
  RecognizerSubmissions recognitions;
  std::map<std::string, std::vector<RecordTruth>> detection_truth;
  std::map<std::string, std::vector<RecordTruth>> recognition_truth;
};

struct Scenario {
  ProtocolManifest train;
  SplitData validation;
  SplitData test;
};

// Deterministic in `spec` (equal seeds give identical scenarios). Validation
// and test manifests carry training days derived from the train split.
Scenario generate_scenario(const ScenarioSpec& spec);

// Writes manifests and submissions in the standard file formats:
//   train.csv, validation.csv, test.csv, <split>_hidden.csv,
//   <split>/detections_<name>.csv, <split>/recognitions_<name>.csv
std::vector<std::filesystem::path> write_scenario(
    const Scenario& scenario, const std::filesystem::path& directory);

// Manifest with exactly the given number of faces per category, one face
// per image; used for protocol-scale fixtures.
ProtocolManifest manifest_with_counts(Split split, std::size_t known,
                                      std::size_t unknown,
                                      std::size_t masked_in_training,
                                      std::size_t masked_not_in_training);

}  // namespace openset
