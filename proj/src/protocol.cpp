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
#include "openset/protocol.hpp"

#include <set>
#include <tuple>

#include "openset/error.hpp"
#include "openset/io.hpp"

namespace openset {

IdentityLabel::IdentityLabel(int value) : value_(value) {
  if (!is_valid_value(value)) {
    throw ValidationError("invalid identity label " + std::to_string(value) +
                          " (expected a positive id or -1)");
  }
}

std::string_view category_code(MaskingCategory category) noexcept {
  switch (category) {
    case MaskingCategory::Known:
      return "K";
    case MaskingCategory::Unknown:
      return "U";
    case MaskingCategory::MaskedInTraining:
      return "MIT";
    case MaskingCategory::MaskedNotInTraining:
      return "MNT";
  }
  return "?";
}

std::optional<MaskingCategory> category_from_code(std::string_view code) {
  for (MaskingCategory c : kAllCategories) {
    if (category_code(c) == code) return c;
  }
  return std::nullopt;
}

std::string_view category_name(MaskingCategory category) noexcept {
  switch (category) {
    case MaskingCategory::Known:
      return "known";
    case MaskingCategory::Unknown:
      return "unknown";
    case MaskingCategory::MaskedInTraining:
      return "masked_in_training";
    case MaskingCategory::MaskedNotInTraining:
      return "masked_not_in_training";
  }
  return "?";
}

std::string_view split_name(Split split) noexcept {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Validation:
      return "validation";
    case Split::Test:
      return "test";
    case Split::Unspecified:
      break;
  }
  return "unspecified";
}

std::optional<Split> split_from_name(std::string_view name) {
  for (Split s : {Split::Unspecified, Split::Train, Split::Validation,
                  Split::Test}) {
    if (split_name(s) == name) return s;
  }
  return std::nullopt;
}

namespace {

std::string describe(const FaceAnnotation& a) {
  return "face on image '" + a.image_id + "' at (" + std::to_string(a.box.x) +
         ", " + std::to_string(a.box.y) + ", " + std::to_string(a.box.width) +
         ", " + std::to_string(a.box.height) + ")";
}

void check_annotation(const FaceAnnotation& a) {
  if (a.image_id.empty()) throw ValidationError("annotation with empty image id");
  if (!a.box.valid()) throw ValidationError("invalid box for " + describe(a));
  switch (a.category) {
    case MaskingCategory::Known:
      if (!a.label.is_known()) {
        throw ValidationError("known " + describe(a) + " has label -1");
      }
      break;
    case MaskingCategory::Unknown:
      if (a.label.is_known()) {
        throw ValidationError("unknown " + describe(a) + " carries label " +
                              std::to_string(a.label.value()));
      }
      break;
    case MaskingCategory::MaskedInTraining:
    case MaskingCategory::MaskedNotInTraining:
      // True label or -1 in a participant-facing view.
      break;
  }
}

}  // namespace

ProtocolManifest::ProtocolManifest(Split split,
                                   std::vector<FaceAnnotation> annotations,
                                   std::map<std::string, std::string> images,
                                   TrainingDays training_days)
    : split_(split),
      annotations_(std::move(annotations)),
      images_(std::move(images)),
      training_days_(std::move(training_days)) {
  std::set<std::tuple<std::string, double, double, double, double>> seen;
  for (std::size_t i = 0; i < annotations_.size(); ++i) {
    const FaceAnnotation& a = annotations_[i];
    check_annotation(a);
    if (!seen.emplace(a.image_id, a.box.x, a.box.y, a.box.width, a.box.height)
             .second) {
      throw ValidationError("duplicate annotation: " + describe(a));
    }
    auto [it, inserted] = images_.emplace(a.image_id, a.day_id);
    if (!inserted && it->second != a.day_id) {
      throw ValidationError("image '" + a.image_id + "' has faces on days '" +
                            it->second + "' and '" + a.day_id + "'");
    }
    by_image_[a.image_id].push_back(i);
    if (a.category == MaskingCategory::Known) ++known_count_;
  }
  for (const auto& [label, days] : training_days_) {
    if (label < 1) {
      throw ValidationError("training days given for non-positive label " +
                            std::to_string(label));
    }
  }
}

const std::vector<std::size_t>& ProtocolManifest::faces_in(
    const std::string& image_id) const {
  static const std::vector<std::size_t> kNone;
  auto it = by_image_.find(image_id);
  return it == by_image_.end() ? kNone : it->second;
}

std::size_t ProtocolManifest::count(MaskingCategory category) const noexcept {
  std::size_t n = 0;
  for (const auto& a : annotations_) n += a.category == category ? 1 : 0;
  return n;
}

ProtocolStats protocol_stats(const ProtocolManifest& manifest) {
  ProtocolStats stats;
  std::map<MaskingCategory, std::set<int>> subjects;
  for (MaskingCategory c : kAllCategories) stats.categories[c] = {};
  for (const auto& a : manifest.annotations()) {
    ++stats.categories[a.category].faces;
    if (a.label.is_known()) subjects[a.category].insert(a.label.value());
  }
  for (MaskingCategory c : kAllCategories) {
    if (c != MaskingCategory::Unknown) {
      stats.categories[c].subjects = subjects[c].size();
    }
  }
  stats.total_faces = manifest.total_faces();
  stats.known_faces = manifest.known_faces();
  stats.images = manifest.images().size();
  return stats;
}

ProtocolManifest load_manifest(const std::filesystem::path& path) {
  return read_manifest(path);
}

ProtocolManifest masked_view(const ProtocolManifest& manifest) {
  std::vector<FaceAnnotation> faces = manifest.annotations();
  for (auto& a : faces) {
    if (is_masked(a.category)) a.label = IdentityLabel::unknown();
  }
  return ProtocolManifest(manifest.split(), std::move(faces), manifest.images(),
                          manifest.training_days());
}

TrainingDays derive_training_days(const ProtocolManifest& train) {
  TrainingDays days;
  for (const auto& a : train.annotations()) {
    if (!a.label.is_known()) continue;
    if (a.category == MaskingCategory::Known ||
        a.category == MaskingCategory::MaskedInTraining) {
      days[a.label.value()].insert(a.day_id);
    }
  }
  return days;
}

ProtocolManifest with_training_days(const ProtocolManifest& manifest,
                                    const ProtocolManifest& train) {
  const TrainingDays source = derive_training_days(train);
  TrainingDays days;
  for (const auto& a : manifest.annotations()) {
    if (a.category != MaskingCategory::Known) continue;
    auto it = source.find(a.label.value());
    days[a.label.value()] =
        it == source.end() ? std::set<std::string>{} : it->second;
  }
  return ProtocolManifest(manifest.split(), manifest.annotations(),
                          manifest.images(), std::move(days));
}

bool is_same_day(const ProtocolManifest& manifest, const FaceAnnotation& face) {
  auto it = manifest.training_days().find(face.label.value());
  return it != manifest.training_days().end() && it->second.count(face.day_id);
}

DaySplit day_split(const ProtocolManifest& manifest,
                   const std::vector<FaceAnnotation>& probes) {
  DaySplit split;
  for (const auto& face : probes) {
    if (face.category != MaskingCategory::Known) {
      throw ValidationError("day split probe is not a known face: image '" +
                            face.image_id + "', category " +
                            std::string(category_code(face.category)));
    }
    (is_same_day(manifest, face) ? split.same_day : split.different_day)
        .push_back(face);
  }
  return split;
}

}  // namespace openset
