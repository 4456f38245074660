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
// Python bindings for the openset evaluation core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>
#include <vector>

#include "openset/consensus.hpp"
#include "openset/curves.hpp"
#include "openset/error.hpp"
#include "openset/geometry.hpp"
#include "openset/io.hpp"
#include "openset/matching.hpp"
#include "openset/protocol.hpp"
#include "openset/synth.hpp"

namespace py = pybind11;
using namespace openset;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Open-set face detection and identification evaluation";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", validation.ptr());
  py::register_exception<ParseError>(m, "ParseError", validation.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<>())
      .def(py::init([](double x, double y, double w, double h) { return BoundingBox{x, y, w, h}; }),
           py::arg("x"), py::arg("y"), py::arg("width"), py::arg("height"))
      .def_readwrite("x", &BoundingBox::x)
      .def_readwrite("y", &BoundingBox::y)
      .def_readwrite("width", &BoundingBox::width)
      .def_readwrite("height", &BoundingBox::height)
      .def_property_readonly("area", &BoundingBox::area)
      .def("__eq__", [](const BoundingBox& a, const BoundingBox& b) { return a == b; })
      .def("__repr__", [](const BoundingBox& b) {
        return "BoundingBox(" + format_number(b.x) + ", " + format_number(b.y) + ", " +
               format_number(b.width) + ", " + format_number(b.height) + ")";
      });

  m.def("modified_jaccard", &modified_jaccard, py::arg("ground_truth"), py::arg("detection"));
  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.attr("OVERLAP_ACCEPTANCE") = kOverlapAcceptance;

  py::enum_<MaskingCategory>(m, "MaskingCategory")
      .value("KNOWN", MaskingCategory::Known)
      .value("UNKNOWN", MaskingCategory::Unknown)
      .value("MASKED_IN_TRAINING", MaskingCategory::MaskedInTraining)
      .value("MASKED_NOT_IN_TRAINING", MaskingCategory::MaskedNotInTraining);

  py::enum_<Split>(m, "Split")
      .value("UNSPECIFIED", Split::Unspecified)
      .value("TRAIN", Split::Train)
      .value("VALIDATION", Split::Validation)
      .value("TEST", Split::Test);

  py::class_<FaceAnnotation>(m, "FaceAnnotation")
      .def(py::init([](std::string image_id, std::string day_id, BoundingBox box, int label,
                       MaskingCategory category) {
             return FaceAnnotation{std::move(image_id), std::move(day_id), box,
                                   IdentityLabel(label), category};
           }),
           py::arg("image_id"), py::arg("day_id"), py::arg("box"), py::arg("label"),
           py::arg("category"))
      .def_readonly("image_id", &FaceAnnotation::image_id)
      .def_readonly("day_id", &FaceAnnotation::day_id)
      .def_readonly("box", &FaceAnnotation::box)
      .def_property_readonly("label", [](const FaceAnnotation& a) { return a.label.value(); })
      .def_readonly("category", &FaceAnnotation::category);

  py::class_<ProtocolManifest>(m, "ProtocolManifest")
      .def(py::init<Split, std::vector<FaceAnnotation>, std::map<std::string, std::string>,
                    TrainingDays>(),
           py::arg("split"), py::arg("annotations"),
           py::arg("images") = std::map<std::string, std::string>{},
           py::arg("training_days") = TrainingDays{})
      .def_property_readonly("split", &ProtocolManifest::split)
      .def_property_readonly("annotations", &ProtocolManifest::annotations)
      .def_property_readonly("images", &ProtocolManifest::images)
      .def_property_readonly("training_days", &ProtocolManifest::training_days)
      .def_property_readonly("total_faces", &ProtocolManifest::total_faces)
      .def_property_readonly("known_faces", &ProtocolManifest::known_faces)
      .def("count", &ProtocolManifest::count)
      .def("__eq__", [](const ProtocolManifest& a, const ProtocolManifest& b) { return a == b; });

  m.def("load_manifest", &load_manifest, py::arg("path"));
  m.def("write_manifest", &write_manifest, py::arg("path"), py::arg("manifest"));
  m.def("masked_view", &masked_view, py::arg("manifest"));
  m.def("with_training_days", &with_training_days, py::arg("manifest"), py::arg("train"));
  m.def("manifest_with_counts", &manifest_with_counts, py::arg("split"), py::arg("known"),
        py::arg("unknown"), py::arg("masked_in_training"), py::arg("masked_not_in_training"));

  py::class_<DetectionRecord>(m, "DetectionRecord")
      .def(py::init([](std::string image_id, BoundingBox box, double confidence) {
             return DetectionRecord{std::move(image_id), box, confidence};
           }),
           py::arg("image_id"), py::arg("box"), py::arg("confidence"))
      .def_readonly("image_id", &DetectionRecord::image_id)
      .def_readonly("box", &DetectionRecord::box)
      .def_readonly("confidence", &DetectionRecord::confidence)
      .def("__eq__", [](const DetectionRecord& a, const DetectionRecord& b) { return a == b; });

  py::class_<RecognitionRecord>(m, "RecognitionRecord")
      .def(py::init([](std::string image_id, BoundingBox box,
                       const std::vector<std::pair<int, double>>& candidates) {
             RecognitionRecord r{std::move(image_id), box, {}};
             for (const auto& [label, score] : candidates) {
               r.candidates.push_back(Candidate{IdentityLabel(label), score});
             }
             validate_candidates(r.candidates);
             return r;
           }),
           py::arg("image_id"), py::arg("box"), py::arg("candidates"))
      .def_readonly("image_id", &RecognitionRecord::image_id)
      .def_readonly("box", &RecognitionRecord::box)
      .def_property_readonly("candidates",
                             [](const RecognitionRecord& r) {
                               std::vector<std::pair<int, double>> out;
                               for (const auto& c : r.candidates) {
                                 out.emplace_back(c.label.value(), c.score);
                               }
                               return out;
                             })
      .def("__eq__",
           [](const RecognitionRecord& a, const RecognitionRecord& b) { return a == b; });

  m.def("read_detections", &parse_detection_file, py::arg("path"));
  m.def("read_recognitions",
        [](const std::filesystem::path& p) { return parse_recognition_file(p); },
        py::arg("path"));
  m.def("write_detections", &write_detection_file, py::arg("path"), py::arg("records"));
  m.def("write_recognitions", &write_recognition_file, py::arg("path"), py::arg("records"));

  py::enum_<NegativeTag>(m, "NegativeTag")
      .value("MASKED_IN_TRAINING", NegativeTag::MaskedInTraining)
      .value("MASKED_NOT_IN_TRAINING", NegativeTag::MaskedNotInTraining)
      .value("FALSE_ACCEPT", NegativeTag::FalseAccept)
      .value("UNKNOWN", NegativeTag::PlainUnknown);

  py::class_<ScorePartition>(m, "ScorePartition")
      .def(py::init([](std::vector<double> positives, std::vector<double> negatives,
                       std::size_t denominator,
                       std::map<NegativeTag, std::vector<double>> tagged) {
             ScorePartition p{std::move(positives), std::move(negatives), std::move(tagged),
                              denominator};
             p.canonicalize();
             return p;
           }),
           py::arg("positives"), py::arg("negatives"), py::arg("denominator"),
           py::arg("tagged_negatives") = std::map<NegativeTag, std::vector<double>>{})
      .def_readonly("positives", &ScorePartition::positives)
      .def_readonly("negatives", &ScorePartition::negatives)
      .def_readonly("tagged_negatives", &ScorePartition::tagged_negatives)
      .def_readonly("denominator", &ScorePartition::denominator)
      .def("__eq__", [](const ScorePartition& a, const ScorePartition& b) { return a == b; });

  m.def("partition_detection_scores", &partition_detection_scores, py::arg("manifest"),
        py::arg("detections"), py::arg("workers") = 1u,
        py::call_guard<py::gil_scoped_release>());
  m.def("partition_recognition_scores", &partition_recognition_scores, py::arg("manifest"),
        py::arg("records"), py::arg("workers") = 1u,
        py::call_guard<py::gil_scoped_release>());

  py::enum_<CurveKind>(m, "CurveKind")
      .value("FROC", CurveKind::FROC)
      .value("DIR", CurveKind::DIR)
      .value("CRR", CurveKind::CRR);

  py::class_<OperatingPoint>(m, "OperatingPoint")
      .def_readonly("budget", &OperatingPoint::budget)
      .def_readonly("threshold", &OperatingPoint::threshold)
      .def_readonly("rate", &OperatingPoint::rate)
      .def_readonly("positive_count", &OperatingPoint::positive_count)
      .def_readonly("negative_count", &OperatingPoint::negative_count)
      .def_readonly("saturated", &OperatingPoint::saturated);

  py::class_<Curve>(m, "Curve")
      .def_readonly("kind", &Curve::kind)
      .def_readonly("points", &Curve::points)
      .def_readonly("denominator", &Curve::denominator)
      .def("__eq__", [](const Curve& a, const Curve& b) { return a == b; });

  m.def("default_budgets", &default_budgets);
  m.def("log_spaced_budgets", &log_spaced_budgets, py::arg("first"), py::arg("last"),
        py::arg("count"));
  m.def("calibrate_threshold",
        [](const std::vector<double>& negatives, std::size_t budget,
           const std::vector<double>& candidates) {
          return calibrate_threshold(negatives, budget, candidates);
        },
        py::arg("negatives"), py::arg("budget"), py::arg("candidates"));
  m.def("build_curve",
        [](const ScorePartition& p, const std::vector<std::size_t>& budgets, CurveKind kind) {
          return build_curve(p, budgets, kind);
        },
        py::arg("partition"), py::arg("budgets"), py::arg("kind"));
  m.def("correct_rejection_curve",
        [](const ScorePartition& p, NegativeTag tag, const std::vector<std::size_t>& grid) {
          return correct_rejection_curve(p, tag, grid);
        },
        py::arg("partition"), py::arg("tag"), py::arg("grid"));
  m.def("read_curve", &read_curve_file, py::arg("path"));
  m.def("emit_report",
        [](const std::map<std::string, Curve>& curves, const std::filesystem::path& dest,
           const std::string& prefix, bool svg) {
          ReportOptions o;
          o.prefix = prefix;
          o.svg = svg;
          return emit_report(curves, dest, o);
        },
        py::arg("curves"), py::arg("destination"), py::arg("prefix") = "curve",
        py::arg("svg") = true);

  py::class_<ConsensusConfig>(m, "ConsensusConfig")
      .def(py::init<>())
      .def_readwrite("min_detectors", &ConsensusConfig::min_detectors)
      .def_readwrite("overlap_threshold", &ConsensusConfig::overlap_threshold)
      .def_readwrite("calibration_budget", &ConsensusConfig::calibration_budget)
      .def_readwrite("upscale_factor", &ConsensusConfig::upscale_factor)
      .def_readwrite("min_agreeing_recognizers", &ConsensusConfig::min_agreeing_recognizers);

  m.def("run_consensus",
        [](const ProtocolManifest& validation, const DetectorSubmissions& validation_detections,
           const ProtocolManifest& target, const DetectorSubmissions& target_detections,
           const RecognizerSubmissions& recognitions, const ConsensusConfig& config,
           unsigned workers) {
          ConsensusOutcome out;
          {
            py::gil_scoped_release release;
            out = run_consensus(validation, validation_detections, target, target_detections,
                                recognitions, config, workers);
          }
          py::dict result;
          result["manifest"] = out.manifest;
          result["audit"] = out.audit.lines();
          result["thresholds"] = out.thresholds;
          result["faces_added"] = out.faces_added;
          result["identities_assigned"] = out.identities_assigned;
          return result;
        },
        py::arg("validation"), py::arg("validation_detections"), py::arg("target"),
        py::arg("target_detections"), py::arg("recognitions"),
        py::arg("config") = ConsensusConfig{}, py::arg("workers") = 1u);

  m.def("synthesize",
        [](std::uint64_t seed, std::size_t images, const std::filesystem::path& directory) {
          ScenarioSpec spec;
          spec.seed = seed;
          spec.image_count = images;
          return write_scenario(generate_scenario(spec), directory);
        },
        py::arg("seed"), py::arg("images"), py::arg("directory"));
}
