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
// openset-eval: scoring, analysis and ground-truth augmentation for open-set
// face detection and identification challenges.
//
// Exit codes: 0 success, 1 validation failure (bad input data or flags),
// 2 I/O failure.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "openset/consensus.hpp"
#include "openset/curves.hpp"
#include "openset/error.hpp"
#include "openset/io.hpp"
#include "openset/matching.hpp"
#include "openset/protocol.hpp"
#include "openset/synth.hpp"

namespace fs = std::filesystem;
using namespace openset;

namespace {

constexpr const char* kOutputEnv = "OPENSET_EVAL_OUTPUT_DIR";

struct Common {
  std::string manifest;
  std::string budgets;
  std::size_t dense = 0;
  std::string output_dir;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  bool no_svg = false;
};

// "name=path" or a bare path whose stem becomes the name.
std::map<std::string, fs::path> named_paths(const std::vector<std::string>& specs) {
  std::map<std::string, fs::path> out;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    std::string name;
    fs::path path;
    if (eq == std::string::npos) {
      path = spec;
      name = path.stem().string();
    } else {
      name = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    }
    if (name.empty() || name.find_first_of(",/\\ ") != std::string::npos) {
      throw ValidationError("invalid participant name '" + name + "'");
    }
    if (!out.emplace(name, path).second) {
      throw ValidationError("participant '" + name + "' given twice");
    }
  }
  return out;
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.empty() || item.front() == '-') {
      throw ValidationError("invalid grid entry '" + item + "'");
    }
    grid.push_back(static_cast<std::size_t>(v));
  }
  return grid;
}

std::vector<std::size_t> budget_grid(const Common& c) {
  if (!c.budgets.empty() && c.dense > 0) {
    throw ValidationError("--budgets and --dense are mutually exclusive");
  }
  if (c.dense > 0) return log_spaced_budgets(10, 100000, c.dense);
  if (!c.budgets.empty()) return parse_grid(c.budgets);
  return default_budgets();
}

fs::path output_dir(const Common& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return ".";
}

void print_table(const SummaryTable& table, const std::string& budget_label) {
  std::cout << std::setw(10) << budget_label;
  for (const auto& name : table.participants) std::cout << ' ' << std::setw(15) << name;
  std::cout << '\n';
  for (std::size_t row = 0; row < table.budgets.size(); ++row) {
    std::cout << std::setw(10) << table.budgets[row];
    for (const auto& cell : table.cells[row]) {
      std::string text = std::to_string(cell.count);
      if (cell.saturated) text += '^';
      if (cell.best) text += '*';
      std::cout << ' ' << std::setw(15) << text;
    }
    std::cout << '\n';
  }
  std::cout << "(^ fewer negatives than the budget: total count given; * best in row)\n";
}

void print_saturation(const std::string& name, const Curve& curve) {
  for (const auto& p : curve.points) {
    if (p.saturated) {
      std::cout << "note: " << name << " saturates at budget " << p.budget
                << "; reporting all " << p.positive_count << " positives\n";
      break;
    }
  }
}

void report_written(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

ReportOptions report_options(const Common& c, std::string prefix, std::string title) {
  ReportOptions o;
  o.prefix = std::move(prefix);
  o.svg = !c.no_svg;
  o.title = std::move(title);
  return o;
}

void add_common(CLI::App* cmd, Common& c, bool budgets = true) {
  cmd->add_option("--manifest", c.manifest, "Evaluator-facing ground-truth manifest (.csv or .json)")
      ->required();
  if (budgets) {
    cmd->add_option("--budgets", c.budgets,
                    "Comma-separated false accept / identification budgets");
    cmd->add_option("--dense", c.dense, "Use N log-spaced budgets between 10 and 100000");
  }
  cmd->add_option("--output-dir", c.output_dir,
                  std::string("Output directory (default $") + kOutputEnv + " or .)");
  cmd->add_option("--workers", c.workers, "Worker threads for per-image matching")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-svg", c.no_svg, "Skip SVG plots");
}

int run_validate(const std::vector<std::string>& manifests,
                 const std::vector<std::string>& detections,
                 const std::vector<std::string>& recognitions, unsigned workers) {
  std::optional<ProtocolManifest> reference;
  for (const auto& path : manifests) {
    ProtocolManifest m = load_manifest(path);
    const ProtocolStats s = protocol_stats(m);
    std::cout << path << ": split=" << split_name(m.split()) << " images=" << s.images
              << " M=" << s.total_faces << " N=" << s.known_faces << '\n';
    for (const auto& [category, stats] : s.categories) {
      std::cout << "  " << std::setw(24) << std::left << category_name(category) << std::right
                << " faces=" << stats.faces << " subjects="
                << (stats.subjects ? std::to_string(*stats.subjects) : std::string("?")) << '\n';
    }
    if (!reference) reference = std::move(m);
  }
  for (const auto& [name, path] : named_paths(detections)) {
    const auto records = parse_detection_file(path);
    if (reference) evaluate_detections(*reference, records, workers);
    std::cout << path.string() << ": " << records.size() << " detections ok\n";
  }
  for (const auto& [name, path] : named_paths(recognitions)) {
    std::vector<ParseWarning> warnings;
    const auto records = parse_recognition_file(path, &warnings);
    for (const auto& w : warnings) {
      std::cerr << "warning: " << path.string() << ":" << w.line << ": " << w.message << '\n';
    }
    if (reference) evaluate_recognitions(*reference, records, workers);
    std::cout << path.string() << ": " << records.size() << " recognition records ok\n";
  }
  return 0;
}

int run_eval_detect(const Common& c, const std::vector<std::string>& detections) {
  const ProtocolManifest manifest = load_manifest(c.manifest);
  const auto budgets = budget_grid(c);
  std::map<std::string, Curve> curves;
  for (const auto& [name, path] : named_paths(detections)) {
    const Evaluation eval = evaluate_detections(manifest, parse_detection_file(path), c.workers);
    curves[name] = build_curve(eval.partition, budgets, CurveKind::FROC);
    const auto& d = eval.match.diagnostics;
    std::cout << name << ": " << d.records << " detections, "
              << d.get(Disposition::Positive) << " matched, "
              << d.get(Disposition::Negative) << " false accepts, "
              << d.get(Disposition::Duplicate) << " duplicates discarded; M="
              << manifest.total_faces() << '\n';
    print_saturation(name, curves[name]);
  }
  print_table(summary_table(curves), "FA");
  report_written(emit_report(curves, output_dir(c), report_options(c, "froc", "FROC")));
  return 0;
}

std::map<std::string, std::pair<std::vector<RecognitionRecord>, Evaluation>> evaluate_all(
    const ProtocolManifest& manifest, const std::vector<std::string>& recognitions,
    unsigned workers) {
  std::map<std::string, std::pair<std::vector<RecognitionRecord>, Evaluation>> out;
  for (const auto& [name, path] : named_paths(recognitions)) {
    std::vector<ParseWarning> warnings;
    auto records = parse_recognition_file(path, &warnings);
    for (const auto& w : warnings) {
      std::cerr << "warning: " << path.string() << ":" << w.line << ": " << w.message << '\n';
    }
    Evaluation eval = evaluate_recognitions(manifest, records, workers);
    const auto& d = eval.match.diagnostics;
    std::cout << name << ": " << d.records << " records, "
              << d.get(Disposition::Positive) << " correct, "
              << d.get(Disposition::Negative) << " false identifications, "
              << d.get(Disposition::WrongIdentity) << " wrong identities, "
              << d.get(Disposition::MissedIdentity) << " known faces labeled -1, "
              << d.get(Disposition::CorrectRejection) << " correct rejections, "
              << d.get(Disposition::Duplicate) << " duplicates; N="
              << manifest.known_faces() << '\n';
    out.emplace(name, std::pair{std::move(records), std::move(eval)});
  }
  return out;
}

int run_eval_recognize(const Common& c, const std::vector<std::string>& recognitions) {
  const ProtocolManifest manifest = load_manifest(c.manifest);
  const auto budgets = budget_grid(c);
  std::map<std::string, Curve> curves;
  for (const auto& [name, data] : evaluate_all(manifest, recognitions, c.workers)) {
    curves[name] = build_curve(data.second.partition, budgets, CurveKind::DIR);
    print_saturation(name, curves[name]);
  }
  print_table(summary_table(curves), "FI");
  report_written(emit_report(curves, output_dir(c), report_options(c, "dir", "DIR")));
  return 0;
}

int run_split_report(const Common& c, const std::string& train_path,
                     const std::vector<std::string>& recognitions) {
  const ProtocolManifest train = load_manifest(train_path);
  const ProtocolManifest manifest = with_training_days(load_manifest(c.manifest), train);
  for (const auto* m : {&train, &manifest}) {
    for (const auto& a : m->annotations()) {
      if (a.day_id.empty()) {
        throw ValidationError("missing day metadata for a face on image '" + a.image_id + "'");
      }
    }
  }
  const auto budgets = budget_grid(c);
  std::map<std::string, Curve> same, different;
  for (const auto& [name, data] : evaluate_all(manifest, recognitions, c.workers)) {
    const DayPartitions parts = partition_by_day(manifest, data.first, data.second);
    same[name] = build_curve(parts.same_day, budgets, CurveKind::DIR);
    different[name] = build_curve(parts.different_day, budgets, CurveKind::DIR);
    std::cout << name << ": same-day N=" << parts.same_day.denominator
              << ", different-day N=" << parts.different_day.denominator << '\n';
    if (parts.different_day.denominator == 0 || parts.same_day.denominator == 0) {
      std::cout << "note: an empty probe group yields undefined rates\n";
    }
  }
  std::cout << "same day:\n";
  print_table(summary_table(same), "FI");
  std::cout << "different day:\n";
  print_table(summary_table(different), "FI");
  const fs::path out = output_dir(c);
  report_written(emit_report(same, out, report_options(c, "dir_same_day", "DIR same day")));
  report_written(
      emit_report(different, out, report_options(c, "dir_different_day", "DIR different day")));
  return 0;
}

int run_crr_report(const Common& c, const std::vector<std::string>& recognitions,
                   const std::vector<std::string>& tags, const std::string& grid_text) {
  const ProtocolManifest manifest = load_manifest(c.manifest);
  std::vector<NegativeTag> wanted;
  for (const auto& t : tags) {
    auto tag = tag_from_name(t);
    if (!tag) throw ValidationError("unknown tag '" + t + "'");
    wanted.push_back(*tag);
  }
  const auto evaluations = evaluate_all(manifest, recognitions, c.workers);
  const fs::path out = output_dir(c);
  for (NegativeTag tag : wanted) {
    std::map<std::string, Curve> curves;
    for (const auto& [name, data] : evaluations) {
      const std::vector<std::size_t> grid =
          grid_text.empty()
              ? log_spaced_budgets(1, std::max<std::size_t>(1, manifest.known_faces()), 50)
              : parse_grid(grid_text);
      try {
        curves[name] = correct_rejection_curve(data.second.partition, tag, grid);
      } catch (const InvalidArgument& e) {
        throw ValidationError(name + ": " + e.what());
      }
    }
    const std::string prefix = "crr_" + std::string(tag_name(tag));
    ReportOptions o = report_options(c, prefix, "CRR " + std::string(tag_name(tag)));
    report_written(emit_report(curves, out, o));
  }
  return 0;
}

struct AugmentArgs {
  std::string validation_manifest;
  std::vector<std::string> detections;
  std::vector<std::string> validation_detections;
  std::vector<std::string> recognitions;
  std::string output_manifest;
  std::string fusion = "xywh";
  ConsensusConfig config;
};

DetectorSubmissions load_detectors(const std::vector<std::string>& specs) {
  DetectorSubmissions out;
  for (const auto& [name, path] : named_paths(specs)) out[name] = parse_detection_file(path);
  return out;
}

int run_augment(const Common& c, AugmentArgs& a) {
  if (a.fusion == "corners") {
    a.config.fusion = BoxParameterization::Corners;
  } else if (a.fusion != "xywh") {
    throw ValidationError("--fusion must be xywh or corners");
  }
  a.config.validate();
  const ProtocolManifest target = load_manifest(c.manifest);
  const ProtocolManifest validation = a.validation_manifest.empty()
                                          ? target
                                          : load_manifest(a.validation_manifest);
  const DetectorSubmissions target_dets = load_detectors(a.detections);
  const DetectorSubmissions val_dets = a.validation_detections.empty()
                                           ? target_dets
                                           : load_detectors(a.validation_detections);
  RecognizerSubmissions recs;
  for (const auto& [name, path] : named_paths(a.recognitions)) {
    recs[name] = parse_recognition_file(path);
  }
  const ConsensusOutcome outcome =
      run_consensus(validation, val_dets, target, target_dets, recs, a.config, c.workers);
  const fs::path out = output_dir(c);
  const fs::path manifest_path =
      a.output_manifest.empty() ? out / "augmented_manifest.csv" : fs::path(a.output_manifest);
  write_manifest(manifest_path, outcome.manifest);
  const fs::path audit_path = out / "augment_audit.log";
  write_text_file(audit_path, outcome.audit.str());
  std::cout << "faces added: " << outcome.faces_added
            << ", identities assigned: " << outcome.identities_assigned << '\n'
            << "M: " << target.total_faces() << " -> " << outcome.manifest.total_faces()
            << ", N: " << target.known_faces() << " -> " << outcome.manifest.known_faces()
            << '\n';
  report_written({manifest_path, audit_path});
  return 0;
}

struct SynthArgs {
  std::uint64_t seed = 0;
  std::size_t images = 50;
  std::size_t faces_min = 1;
  std::size_t faces_max = 8;
  std::size_t detectors = 3;
  std::size_t recognizers = 3;
  double unlabeled = 0.0;
  bool crowded = false;
};

int run_synth(const Common& c, const SynthArgs& a) {
  ScenarioSpec spec;
  spec.seed = a.seed;
  spec.image_count = a.images;
  spec.faces_min = a.faces_min;
  spec.faces_max = a.faces_max;
  spec.unlabeled_fraction = a.unlabeled;
  spec.crowded = a.crowded;
  spec.detectors.clear();
  spec.recognizers.clear();
  for (std::size_t i = 0; i < a.detectors; ++i) {
    DetectorModel d;
    d.name = "detector" + std::to_string(i + 1);
    d.miss_rate = 0.05 + 0.05 * static_cast<double>(i % 4);
    d.false_accepts_per_image = 0.5 + static_cast<double>(i % 3);
    d.jitter = 0.05;
    d.true_mean = 2.0 + 0.25 * static_cast<double>(i % 3);
    spec.detectors.push_back(d);
  }
  for (std::size_t i = 0; i < a.recognizers; ++i) {
    if (spec.detectors.empty()) throw ValidationError("recognizers need at least one detector");
    RecognizerModel r;
    r.name = "recognizer" + std::to_string(i + 1);
    r.detector = i % spec.detectors.size();
    r.rank1_accuracy = 0.6 + 0.1 * static_cast<double>(i % 3);
    r.unknown_rejection = 0.5 + 0.15 * static_cast<double>(i % 3);
    spec.recognizers.push_back(r);
  }
  const Scenario scenario = generate_scenario(spec);
  report_written(write_scenario(scenario, output_dir(c)));
  return 0;
}

int run_summarize(const Common& c, const std::vector<std::string>& curve_files,
                  const std::string& prefix) {
  std::map<std::string, Curve> curves;
  for (const auto& [name, path] : named_paths(curve_files)) curves[name] = read_curve_file(path);
  const SummaryTable table = summary_table(curves);
  print_table(table, std::string(curve_kind_name(table.kind)));
  const fs::path out = output_dir(c);
  const fs::path csv = out / (prefix + "_summary.csv");
  std::ostringstream text;
  write_summary_csv(text, table);
  write_text_file(csv, text.str());
  std::vector<fs::path> written{csv};
  if (!c.no_svg) {
    std::vector<std::pair<std::string, Curve>> series(curves.begin(), curves.end());
    std::ostringstream svg;
    write_svg(svg, series, std::string(curve_kind_name(table.kind)));
    write_text_file(out / (prefix + "_all.svg"), svg.str());
    written.push_back(out / (prefix + "_all.svg"));
  }
  report_written(written);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-set face detection and identification challenge evaluation"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> manifests, detections, recognitions, tags, curve_files;
  std::string train_manifest, grid, prefix = "joint";
  AugmentArgs augment;
  SynthArgs synth;

  auto* validate = app.add_subcommand("validate", "Parse and check manifests and submissions");
  validate->add_option("--manifest", manifests, "Manifest(s) to check; the first one is used "
                                                "to verify submission image ids");
  validate->add_option("--detections", detections, "Detection file(s) [name=]path");
  validate->add_option("--recognitions", recognitions, "Recognition file(s) [name=]path");
  validate->add_option("--workers", common.workers)->check(CLI::PositiveNumber);

  auto* detect = app.add_subcommand("eval-detect", "FROC evaluation of detection submissions");
  add_common(detect, common);
  detect->add_option("--detections", detections, "Detection file(s) [name=]path")->required();

  auto* recognize = app.add_subcommand("eval-recognize", "Rank-1 DIR evaluation");
  add_common(recognize, common);
  recognize->add_option("--recognitions", recognitions, "Recognition file(s) [name=]path")
      ->required();

  auto* split = app.add_subcommand("split-report", "Same-day vs different-day DIR curves");
  add_common(split, common);
  split->add_option("--train-manifest", train_manifest, "Training split manifest")->required();
  split->add_option("--recognitions", recognitions, "Recognition file(s) [name=]path")
      ->required();

  auto* crr = app.add_subcommand("crr-report", "Correct rejection rates per negative subset");
  add_common(crr, common, false);
  crr->add_option("--recognitions", recognitions, "Recognition file(s) [name=]path")
      ->required();
  tags = {"masked_in_training", "masked_not_in_training", "false_accept"};
  crr->add_option("--tags", tags, "Subsets: masked_in_training, masked_not_in_training, "
                                  "false_accept, unknown")
      ->capture_default_str();
  crr->add_option("--grid", grid, "Comma-separated counts of correct identifications "
                                  "(default: 50 log-spaced values up to N)");

  auto* aug = app.add_subcommand("augment", "Consensus ground-truth augmentation");
  add_common(aug, common, false);
  aug->add_option("--validation-manifest", augment.validation_manifest,
                  "Validation manifest used for threshold calibration (default --manifest)");
  aug->add_option("--detections", augment.detections, "Detector outputs on --manifest")
      ->required();
  aug->add_option("--validation-detections", augment.validation_detections,
                  "Detector outputs on the validation split (default --detections)");
  aug->add_option("--recognitions", augment.recognitions, "Recognizer outputs on --manifest");
  aug->add_option("--output-manifest", augment.output_manifest, "Augmented manifest path");
  aug->add_option("--min-detectors", augment.config.min_detectors)->capture_default_str();
  aug->add_option("--overlap-iou", augment.config.overlap_threshold)->capture_default_str();
  aug->add_option("--calibration-budget", augment.config.calibration_budget)
      ->capture_default_str();
  aug->add_option("--upscale", augment.config.upscale_factor)->capture_default_str();
  aug->add_option("--min-recognizers", augment.config.min_agreeing_recognizers)
      ->capture_default_str();
  aug->add_option("--fusion", augment.fusion, "Box averaging: xywh or corners")
      ->capture_default_str();

  auto* syn = app.add_subcommand("synth", "Generate a seeded synthetic challenge");
  syn->add_option("--seed", synth.seed, "Random seed")->required();
  syn->add_option("--output-dir", common.output_dir, "Output directory");
  syn->add_option("--images", synth.images, "Images per split")->capture_default_str();
  syn->add_option("--faces-min", synth.faces_min)->capture_default_str();
  syn->add_option("--faces-max", synth.faces_max)->capture_default_str();
  syn->add_option("--detectors", synth.detectors)->capture_default_str();
  syn->add_option("--recognizers", synth.recognizers)->capture_default_str();
  syn->add_option("--unlabeled", synth.unlabeled, "Fraction of faces withheld from ground truth")
      ->capture_default_str();
  syn->add_flag("--crowded", synth.crowded, "Allow overlapping and nested faces");

  auto* summarize = app.add_subcommand("summarize", "Joint table and plot from curve CSVs");
  summarize->add_option("--curves", curve_files, "Curve file(s) [name=]path")->required();
  summarize->add_option("--output-dir", common.output_dir, "Output directory");
  summarize->add_option("--prefix", prefix, "Output file prefix")->capture_default_str();
  summarize->add_flag("--no-svg", common.no_svg, "Skip the SVG plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate) return run_validate(manifests, detections, recognitions, common.workers);
    if (*detect) return run_eval_detect(common, detections);
    if (*recognize) return run_eval_recognize(common, recognitions);
    if (*split) return run_split_report(common, train_manifest, recognitions);
    if (*crr) return run_crr_report(common, recognitions, tags, grid);
    if (*aug) return run_augment(common, augment);
    if (*syn) return run_synth(common, synth);
    if (*summarize) return run_summarize(common, curve_files, prefix);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
