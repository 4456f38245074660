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
#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "openset/geometry.hpp"

namespace openset {

// Subject identity. Positive values are known subjects; -1 marks an unknown
// (or masked) face. Every other value is rejected on construction.
class IdentityLabel {
 public:
  static constexpr int kUnknownValue = -1;

  constexpr IdentityLabel() noexcept = default;
  explicit IdentityLabel(int value);

  static constexpr IdentityLabel unknown() noexcept { return IdentityLabel(); }
  static bool is_valid_value(long long value) noexcept {
    return value >= 1 || value == kUnknownValue;
  }

  constexpr int value() const noexcept { return value_; }
  constexpr bool is_known() const noexcept { return value_ >= 1; }

  friend constexpr auto operator<=>(IdentityLabel, IdentityLabel) = default;

 private:
  int value_ = kUnknownValue;
};

enum class MaskingCategory {
  Known,
  Unknown,
  MaskedInTraining,
  MaskedNotInTraining,
};

inline constexpr std::array<MaskingCategory, 4> kAllCategories = {
    MaskingCategory::Known, MaskingCategory::Unknown,
    MaskingCategory::MaskedInTraining, MaskingCategory::MaskedNotInTraining};

// File codes: K, U, MIT, MNT.
std::string_view category_code(MaskingCategory category) noexcept;
std::optional<MaskingCategory> category_from_code(std::string_view code);
std::string_view category_name(MaskingCategory category) noexcept;

constexpr bool is_masked(MaskingCategory c) noexcept {
  return c == MaskingCategory::MaskedInTraining ||
         c == MaskingCategory::MaskedNotInTraining;
}

struct FaceAnnotation {
  std::string image_id;
  std::string day_id;
  BoundingBox box;
  // True label. For masked faces this is the withheld identity (or -1 in a
  // participant-facing view).
  IdentityLabel label;
  MaskingCategory category = MaskingCategory::Unknown;

  friend bool operator==(const FaceAnnotation&,
                         const FaceAnnotation&) = default;
};

enum class Split { Unspecified, Train, Validation, Test };

std::string_view split_name(Split split) noexcept;
std::optional<Split> split_from_name(std::string_view name);

using TrainingDays = std::map<int, std::set<std::string>>;

// Ground truth of one protocol split. Immutable once constructed; the
// constructor enforces label/category consistency, unique (image, box)
// pairs, and a single capture day per image.
class ProtocolManifest {
 public:
  ProtocolManifest() = default;

  // `images` lists images (with their day) that may carry no faces at all;
  // images referenced by annotations are added automatically.
  ProtocolManifest(Split split, std::vector<FaceAnnotation> annotations,
                   std::map<std::string, std::string> images = {},
                   TrainingDays training_days = {});

  Split split() const noexcept { return split_; }
  const std::vector<FaceAnnotation>& annotations() const noexcept {
    return annotations_;
  }
  // image_id -> day_id, for every image in the split.
  const std::map<std::string, std::string>& images() const noexcept {
    return images_;
  }
  const TrainingDays& training_days() const noexcept { return training_days_; }

  bool has_image(const std::string& image_id) const {
    return images_.count(image_id) != 0;
  }

  // Indices into annotations(), grouped per image, in annotation order.
  const std::vector<std::size_t>& faces_in(const std::string& image_id) const;

  // M: every labeled face.
  std::size_t total_faces() const noexcept { return annotations_.size(); }
  // N: faces of known (unmasked) identities.
  std::size_t known_faces() const noexcept { return known_count_; }
  std::size_t count(MaskingCategory category) const noexcept;

  friend bool operator==(const ProtocolManifest& a,
                         const ProtocolManifest& b) {
    return a.split_ == b.split_ && a.annotations_ == b.annotations_ &&
           a.images_ == b.images_ && a.training_days_ == b.training_days_;
  }

 private:
  Split split_ = Split::Unspecified;
  std::vector<FaceAnnotation> annotations_;
  std::map<std::string, std::string> images_;
  TrainingDays training_days_;
  std::map<std::string, std::vector<std::size_t>> by_image_;
  std::size_t known_count_ = 0;
};

// Per-category face and subject counts, the shape of a protocol table.
struct CategoryStats {
  std::size_t faces = 0;
  // Distinct positive labels; nullopt where identities are not recorded.
  std::optional<std::size_t> subjects;
};

struct ProtocolStats {
  std::map<MaskingCategory, CategoryStats> categories;
  std::size_t total_faces = 0;
  std::size_t known_faces = 0;
  std::size_t images = 0;
};

ProtocolStats protocol_stats(const ProtocolManifest& manifest);

// Loads a manifest in CSV or JSON form (chosen by extension, see io.hpp).
ProtocolManifest load_manifest(const std::filesystem::path& path);

// Participant-facing copy: every masked face has its label replaced by -1.
// Boxes, images, categories and counts are untouched.
ProtocolManifest masked_view(const ProtocolManifest& manifest);

// identity -> set of days on which it appears in the training split. Known
// and masked-in-training faces with a positive label contribute.
TrainingDays derive_training_days(const ProtocolManifest& train);

// Copy of `manifest` whose training-day map has an entry for every known
// identity of the split, taken from `train` (empty when absent there).
ProtocolManifest with_training_days(const ProtocolManifest& manifest,
                                    const ProtocolManifest& train);

struct DaySplit {
  std::vector<FaceAnnotation> same_day;
  std::vector<FaceAnnotation> different_day;
};

// Partitions known probe faces by whether their capture day is one of the
// training days of their identity. Rejects probes that are not Known.
DaySplit day_split(const ProtocolManifest& manifest,
                   const std::vector<FaceAnnotation>& probes);

// True when `face` was captured on a training day of its identity.
bool is_same_day(const ProtocolManifest& manifest, const FaceAnnotation& face);

}  // namespace openset
