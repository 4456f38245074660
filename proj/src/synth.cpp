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
#include "openset/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "openset/error.hpp"
#include "openset/io.hpp"

namespace openset {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
  return buf;
}

bool touches(const BoundingBox& a, const BoundingBox& b, double margin) {
  return a.x - margin < b.right() && b.x - margin < a.right() &&
         a.y - margin < b.bottom() && b.y - margin < a.bottom();
}

// A generated face before the split into labeled and withheld.
struct TrueFace {
  FaceAnnotation face;
  bool hidden = false;
};

class Generator {
 public:
  explicit Generator(const ScenarioSpec& spec) : spec_(spec), rng_(spec.seed) {
    for (std::size_t d = 0; d < spec_.day_count; ++d) days_.push_back(numbered("d", d + 1, 2));
  }

  ProtocolManifest make_train() {
    std::vector<FaceAnnotation> faces;
    std::map<std::string, std::string> images;
    for (std::size_t i = 0; i < spec_.image_count; ++i) {
      const std::string image = numbered("train_", i, 5);
      const std::string& day = pick(days_);
      images[image] = day;
      for (const auto& box : place_faces()) {
        FaceAnnotation a{image, day, box, IdentityLabel{}, MaskingCategory::Unknown};
        const double u = uniform();
        if (u < spec_.known_fraction) {
          a.category = MaskingCategory::Known;
          a.label = IdentityLabel(home_identity(day));
        } else if (u < spec_.known_fraction + spec_.masked_in_training_fraction) {
          a.category = MaskingCategory::MaskedInTraining;
          a.label = IdentityLabel(masked_label(true));
        }
        faces.push_back(std::move(a));
      }
    }
    return ProtocolManifest(Split::Train, std::move(faces), std::move(images));
  }

  SplitData make_split(Split split, const ProtocolManifest& train) {
    const TrainingDays trained = derive_training_days(train);
    const char* prefix = split == Split::Validation ? "val_" : "test_";
    std::vector<TrueFace> all;
    std::map<std::string, std::string> images;
    std::vector<std::string> image_order;
    for (std::size_t i = 0; i < spec_.image_count; ++i) {
      const std::string image = numbered(prefix, i, 5);
      const std::string& day = pick(days_);
      images[image] = day;
      image_order.push_back(image);
      for (const auto& box : place_faces()) {
        TrueFace t;
        t.face = {image, day, box, IdentityLabel{}, MaskingCategory::Unknown};
        const double u = uniform();
        const double k = spec_.known_fraction;
        const double mit = k + spec_.masked_in_training_fraction;
        const double mnt = mit + spec_.masked_not_in_training_fraction;
        if (u < k) {
          t.face.category = MaskingCategory::Known;
          t.face.label = IdentityLabel(probe_identity(day, trained));
        } else if (u < mit) {
          t.face.category = MaskingCategory::MaskedInTraining;
          t.face.label = IdentityLabel(masked_label(true));
        } else if (u < mnt) {
          t.face.category = MaskingCategory::MaskedNotInTraining;
          t.face.label = IdentityLabel(masked_label(false));
        }
        t.hidden = uniform() < spec_.unlabeled_fraction;
        all.push_back(std::move(t));
      }
    }

    SplitData data;
    std::vector<FaceAnnotation> labeled;
    // Per true face: (is hidden, index in labeled / hidden list).
    std::vector<std::pair<bool, std::size_t>> where;
    for (const auto& t : all) {
      if (t.hidden) {
        where.emplace_back(true, data.hidden_faces.size());
        data.hidden_faces.push_back(t.face);
      } else {
        where.emplace_back(false, labeled.size());
        labeled.push_back(t.face);
      }
    }
    ProtocolManifest bare(split, std::move(labeled), images);
    data.manifest = with_training_days(bare, train);

    for (const DetectorModel& model : spec_.detectors) {
      auto& records = data.detections[model.name];
      auto& truth = data.detection_truth[model.name];
      std::size_t face_cursor = 0;
      for (const auto& image : image_order) {
        std::vector<BoundingBox> occupied;
        for (std::size_t f = face_cursor; f < all.size() && all[f].face.image_id == image; ++f) {
          occupied.push_back(all[f].face.box);
        }
        for (; face_cursor < all.size() && all[face_cursor].face.image_id == image; ++face_cursor) {
          if (uniform() < model.miss_rate) continue;
          RecordTruth rt;
          if (where[face_cursor].first) {
            rt.hidden_face = where[face_cursor].second;
          } else {
            rt.face = where[face_cursor].second;
          }
          const BoundingBox& gt = all[face_cursor].face.box;
          records.push_back({image, detect_box(gt, model),
                             normal(model.true_mean, model.true_stddev)});
          truth.push_back(rt);
          if (uniform() < model.duplicate_rate) {
            rt.duplicate = true;
            records.push_back({image, detect_box(gt, model),
                               normal(model.true_mean, model.true_stddev)});
            truth.push_back(rt);
          }
        }
        const std::size_t fa = poisson(model.false_accepts_per_image);
        for (std::size_t n = 0; n < fa; ++n) {
          auto box = free_box(occupied);
          if (!box) continue;
          records.push_back({image, *box, normal(model.false_mean, model.false_stddev)});
          truth.push_back({});
        }
      }
    }

    for (const RecognizerModel& model : spec_.recognizers) {
      const DetectorModel& source = spec_.detectors[model.detector];
      const auto& boxes = data.detections.at(source.name);
      const auto& box_truth = data.detection_truth.at(source.name);
      auto& records = data.recognitions[model.name];
      for (std::size_t r = 0; r < boxes.size(); ++r) {
        const FaceAnnotation* face = nullptr;
        if (box_truth[r].face) face = &data.manifest.annotations()[*box_truth[r].face];
        if (box_truth[r].hidden_face) face = &data.hidden_faces[*box_truth[r].hidden_face];
        records.push_back({boxes[r].image_id, boxes[r].box, candidates(model, face)});
      }
      data.recognition_truth[model.name] = box_truth;
    }
    return data;
  }

 private:
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  double uniform(double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal(double mean, double stddev) {
    return stddev > 0.0 ? std::normal_distribution<double>(mean, stddev)(rng_) : mean;
  }
  std::size_t poisson(double mean) {
    return mean > 0.0 ? static_cast<std::size_t>(std::poisson_distribution<int>(mean)(rng_)) : 0;
  }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform_int(0, static_cast<int>(v.size()) - 1))];
  }

  int known_label() { return uniform_int(1, static_cast<int>(spec_.known_identities)); }

  int masked_label(bool in_training) {
    const int base = static_cast<int>(spec_.known_identities) +
                     (in_training ? 0 : static_cast<int>(spec_.masked_identities));
    return base + uniform_int(1, static_cast<int>(spec_.masked_identities));
  }

  // Known identity whose home day is `day`; every identity has one.
  int home_identity(const std::string& day) {
    const auto d = static_cast<std::size_t>(std::find(days_.begin(), days_.end(), day) - days_.begin());
    std::vector<int> candidates;
    for (std::size_t id = 1; id <= spec_.known_identities; ++id) {
      if ((id - 1) % spec_.day_count == d) candidates.push_back(static_cast<int>(id));
    }
    return candidates.empty() ? known_label() : pick(candidates);
  }

  int probe_identity(const std::string& day, const TrainingDays& trained) {
    std::vector<int> same, other;
    for (std::size_t id = 1; id <= spec_.known_identities; ++id) {
      auto it = trained.find(static_cast<int>(id));
      const bool on_day = it != trained.end() && it->second.count(day);
      (on_day ? same : other).push_back(static_cast<int>(id));
    }
    const bool different = uniform() < spec_.different_day_fraction;
    const auto& preferred = different ? other : same;
    const auto& fallback = different ? same : other;
    return preferred.empty() ? pick(fallback) : pick(preferred);
  }

  BoundingBox random_box() {
    const int w = uniform_int(spec_.face_min_size, spec_.face_max_size);
    const int h = std::max(1, static_cast<int>(std::lround(w * uniform(1.0, 1.3))));
    const int x = uniform_int(0, std::max(0, spec_.image_width - w));
    const int y = uniform_int(0, std::max(0, spec_.image_height - h));
    return {double(x), double(y), double(w), double(h)};
  }

  std::vector<BoundingBox> place_faces() {
    const auto n = static_cast<std::size_t>(uniform_int(static_cast<int>(spec_.faces_min),
                                                        static_cast<int>(spec_.faces_max)));
    std::vector<BoundingBox> boxes;
    for (std::size_t i = 0; i < n; ++i) {
      if (spec_.crowded && !boxes.empty() && uniform() < 0.5) {
        const BoundingBox& host = pick(boxes);
        BoundingBox b;
        if (uniform() < 0.5) {
          // Nested inside the host.
          const double w = std::max(2.0, std::round(host.width * uniform(0.3, 0.7)));
          const double h = std::max(2.0, std::round(host.height * uniform(0.3, 0.7)));
          b = {host.x + std::round(uniform(0.0, host.width - w)),
               host.y + std::round(uniform(0.0, host.height - h)), w, h};
        } else {
          // Partially overlapping the host.
          b = {host.x + std::round(host.width * uniform(-0.5, 0.5)),
               host.y + std::round(host.height * uniform(-0.5, 0.5)),
               std::max(2.0, std::round(host.width * uniform(0.7, 1.3))),
               std::max(2.0, std::round(host.height * uniform(0.7, 1.3)))};
        }
        if (std::find(boxes.begin(), boxes.end(), b) == boxes.end()) boxes.push_back(b);
        continue;
      }
      for (int attempt = 0; attempt < 200; ++attempt) {
        const BoundingBox b = random_box();
        const bool clear = spec_.crowded ||
            std::none_of(boxes.begin(), boxes.end(), [&](const BoundingBox& o) {
              return touches(o, b, 0.5 * std::max(o.width, b.width));
            });
        if (clear && std::find(boxes.begin(), boxes.end(), b) == boxes.end()) {
          boxes.push_back(b);
          break;
        }
      }
    }
    return boxes;
  }

  BoundingBox detect_box(const BoundingBox& gt, const DetectorModel& model) {
    const double f = uniform(model.shrink_min, model.shrink_max);
    const double w = std::max(1.0, std::round(gt.width * f));
    const double h = std::max(1.0, std::round(gt.height * f));
    const double cx = gt.center_x() + gt.width * model.jitter * uniform(-1.0, 1.0);
    const double cy = gt.center_y() + gt.height * model.jitter * uniform(-1.0, 1.0);
    double x = std::round(cx - 0.5 * w);
    double y = std::round(cy - 0.5 * h);
    if (model.jitter == 0.0) {
      // Stay inside the ground truth so the overlap is exactly 1.
      x = std::clamp(x, gt.x, gt.right() - w);
      y = std::clamp(y, gt.y, gt.bottom() - h);
    }
    return {x, y, w, h};
  }

  std::optional<BoundingBox> free_box(const std::vector<BoundingBox>& occupied) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      const BoundingBox b = random_box();
      if (spec_.crowded ||
          std::none_of(occupied.begin(), occupied.end(), [&](const BoundingBox& o) {
            return touches(o, b, 0.0);
          })) {
        return b;
      }
    }
    return std::nullopt;
  }

  std::vector<Candidate> candidates(const RecognizerModel& model,
                                    const FaceAnnotation* face) {
    const double u = uniform();
    int top = -1;
    double score = 0.0;
    if (face && face->category == MaskingCategory::Known) {
      if (u < model.rank1_accuracy) {
        top = face->label.value();
        score = normal(model.correct_mean, model.correct_stddev);
      } else {
        score = normal(model.incorrect_mean, model.incorrect_stddev);
        if (uniform() < 0.5 && spec_.known_identities > 1) {
          do {
            top = known_label();
          } while (top == face->label.value());
        }
      }
    } else {
      const double rejection = face ? model.unknown_rejection : model.false_accept_rejection;
      score = normal(model.incorrect_mean, model.incorrect_stddev);
      if (u >= rejection) top = known_label();
    }

    std::vector<Candidate> out{{IdentityLabel(top), score}};
    std::set<int> used{top};
    const std::size_t want = std::min<std::size_t>(
        {model.candidates, kMaxCandidates, spec_.known_identities + 1});
    while (out.size() < want) {
      const int label = uniform() < 0.1 ? -1 : known_label();
      if (!used.insert(label).second) continue;
      score -= uniform(0.01, 0.1);
      out.push_back({IdentityLabel(label), score});
    }
    return out;
  }

  const ScenarioSpec& spec_;
  std::mt19937_64 rng_;
  std::vector<std::string> days_;
};

}  // namespace

void ScenarioSpec::validate() const {
  if (image_count == 0) throw InvalidArgument("scenario needs at least one image");
  if (faces_min > faces_max) throw InvalidArgument("faces_min exceeds faces_max");
  if (!is_probability(known_fraction) || !is_probability(masked_in_training_fraction) ||
      !is_probability(masked_not_in_training_fraction) ||
      known_fraction + masked_in_training_fraction + masked_not_in_training_fraction > 1.0) {
    throw InvalidArgument("category fractions must be probabilities summing to <= 1");
  }
  if (!is_probability(different_day_fraction) || !is_probability(unlabeled_fraction)) {
    throw InvalidArgument("day and unlabeled fractions must be probabilities");
  }
  if (known_identities == 0) throw InvalidArgument("need at least one known identity");
  if (masked_identities == 0 &&
      (masked_in_training_fraction > 0.0 || masked_not_in_training_fraction > 0.0)) {
    throw InvalidArgument("masked faces requested without masked identities");
  }
  if (day_count == 0) throw InvalidArgument("need at least one capture day");
  if (face_min_size < 2 || face_max_size < face_min_size ||
      face_max_size > std::min(image_width, image_height)) {
    throw InvalidArgument("face sizes must satisfy 2 <= min <= max <= image size");
  }
  std::set<std::string> names;
  for (const auto& d : detectors) {
    if (!names.insert(d.name).second) throw InvalidArgument("duplicate detector name '" + d.name + "'");
    if (!is_probability(d.miss_rate) || !is_probability(d.duplicate_rate) ||
        d.false_accepts_per_image < 0.0 || d.jitter < 0.0 || d.shrink_min <= 0.0 ||
        d.shrink_max < d.shrink_min || d.shrink_max > 1.0 || d.true_stddev < 0.0 ||
        d.false_stddev < 0.0) {
      throw InvalidArgument("detector '" + d.name + "' has out-of-range parameters");
    }
  }
  names.clear();
  for (const auto& r : recognizers) {
    if (!names.insert(r.name).second) throw InvalidArgument("duplicate recognizer name '" + r.name + "'");
    if (r.detector >= detectors.size()) {
      throw InvalidArgument("recognizer '" + r.name + "' refers to a missing detector");
    }
    if (!is_probability(r.rank1_accuracy) || !is_probability(r.unknown_rejection) ||
        !is_probability(r.false_accept_rejection) || r.candidates == 0 ||
        r.correct_stddev < 0.0 || r.incorrect_stddev < 0.0) {
      throw InvalidArgument("recognizer '" + r.name + "' has out-of-range parameters");
    }
  }
}

Scenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Generator gen(spec);
  Scenario s;
  s.train = gen.make_train();
  s.validation = gen.make_split(Split::Validation, s.train);
  s.test = gen.make_split(Split::Test, s.train);
  return s;
}

std::vector<std::filesystem::path> write_scenario(
    const Scenario& scenario, const std::filesystem::path& directory) {
  std::vector<std::filesystem::path> written;
  auto put_manifest = [&](const std::filesystem::path& p, const ProtocolManifest& m) {
    write_manifest(p, m);
    written.push_back(p);
  };
  put_manifest(directory / "train.csv", scenario.train);
  const std::pair<const char*, const SplitData*> splits[] = {
      {"validation", &scenario.validation}, {"test", &scenario.test}};
  for (const auto& [name, data] : splits) {
    put_manifest(directory / (std::string(name) + ".csv"), data->manifest);
    put_manifest(directory / (std::string(name) + "_hidden.csv"),
                 ProtocolManifest(data->manifest.split(), data->hidden_faces));
    for (const auto& [det, records] : data->detections) {
      const auto p = directory / name / ("detections_" + det + ".csv");
      write_detection_file(p, records);
      written.push_back(p);
    }
    for (const auto& [rec, records] : data->recognitions) {
      const auto p = directory / name / ("recognitions_" + rec + ".csv");
      write_recognition_file(p, records);
      written.push_back(p);
    }
  }
  return written;
}

ProtocolManifest manifest_with_counts(Split split, std::size_t known,
                                      std::size_t unknown,
                                      std::size_t masked_in_training,
                                      std::size_t masked_not_in_training) {
  std::vector<FaceAnnotation> faces;
  faces.reserve(known + unknown + masked_in_training + masked_not_in_training);
  std::size_t n = 0;
  auto add = [&](std::size_t count, MaskingCategory category, int label_base) {
    for (std::size_t i = 0; i < count; ++i, ++n) {
      const int label =
          label_base > 0 ? label_base + static_cast<int>(i % 1000) : IdentityLabel::kUnknownValue;
      faces.push_back({numbered("img", n, 6), "d01", BoundingBox{0, 0, 64, 80},
                       IdentityLabel(label), category});
    }
  };
  add(known, MaskingCategory::Known, 1);
  add(unknown, MaskingCategory::Unknown, -1);
  add(masked_in_training, MaskingCategory::MaskedInTraining, 5001);
  add(masked_not_in_training, MaskingCategory::MaskedNotInTraining, 9001);
  return ProtocolManifest(split, std::move(faces));
}

}  // namespace openset
