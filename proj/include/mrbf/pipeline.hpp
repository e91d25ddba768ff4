// End-to-end operations behind the CLI subcommands: corpus generation,
// feature extraction, KNN evaluation, tree training/evaluation, prediction
// and moment inspection. Kept out of the tool so tests can drive the exact
// same code paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrbf/config.hpp"
#include "mrbf/dataset.hpp"
#include "mrbf/eval.hpp"
#include "mrbf/glyphs.hpp"
#include "mrbf/groups.hpp"
#include "mrbf/knn.hpp"
#include "mrbf/moments.hpp"
#include "mrbf/raster.hpp"
#include "mrbf/tree.hpp"

namespace mrbf {

inline std::string resolve_path(const std::string& base_dir, const std::string& p) {
  std::filesystem::path fp(p);
  if (fp.is_absolute() || base_dir.empty()) return p;
  return (std::filesystem::path(base_dir) / fp).string();
}

// Random affine jitter: rotation, per-axis scale, shear and translation drawn
// in a fixed order so corpora are reproducible.
inline AffineMap make_jitter(const RunConfig& cfg, Rng& rng) {
  const double rot = rng.uniform(-cfg.jitter_rotate, cfg.jitter_rotate);
  const double sx = rng.uniform(1.0 - cfg.jitter_scale, 1.0 + cfg.jitter_scale);
  const double sy = rng.uniform(1.0 - cfg.jitter_scale, 1.0 + cfg.jitter_scale);
  const double shear = rng.uniform(-cfg.jitter_shear, cfg.jitter_shear);
  const double tx = rng.uniform(-cfg.jitter_translate, cfg.jitter_translate);
  const double ty = rng.uniform(-cfg.jitter_translate, cfg.jitter_translate);

  AffineMap sh;
  sh.m = {{{1.0, shear}, {0.0, 1.0}}};
  AffineMap map = AffineMap::rotation(rot).compose(sh).compose(AffineMap::scaling(sx, sy));
  map.t = {tx, ty};
  return map;
}

struct GeneratedDataset {
  std::string train_manifest;
  std::string test_manifest;
  int train_rows = 0;
  int test_rows = 0;
};

// Renders 2 * n_per_letter samples per letter and splits them evenly into
// train/test by a seeded draw; every letter appears in both splits.
inline GeneratedDataset gen_dataset(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.n_per_letter < 1) throw std::invalid_argument("gen_dataset: n_per_letter < 1");
  const GroupTable table = GroupTable::from_spec(cfg.groups);
  std::filesystem::create_directories(out_dir);

  std::vector<ManifestRecord> train, test;
  for (char letter = 'a'; letter <= 'z'; ++letter) {
    const std::uint64_t letter_seed = mix_seed(cfg.seed, letter - 'a');
    const int total = 2 * cfg.n_per_letter;

    std::vector<int> order(total);
    for (int i = 0; i < total; ++i) order[i] = i;
    Rng split_rng(mix_seed(letter_seed, 0xFFFF));
    split_rng.shuffle(order);

    for (int i = 0; i < total; ++i) {
      const std::uint64_t sample_seed = mix_seed(letter_seed, i);
      Rng jitter_rng(mix_seed(sample_seed, 1));

      GlyphSpec spec;
      spec.label = letter;
      spec.canvas_width = cfg.canvas;
      spec.canvas_height = cfg.canvas;
      spec.stroke_width = cfg.stroke_width;
      spec.margin = cfg.margin;
      spec.affine = make_jitter(cfg, jitter_rng);
      spec.noise_rate = cfg.noise_rate;
      spec.seed = mix_seed(sample_seed, 2);

      const BinaryImage img = render_glyph(spec);
      char name[32];
      std::snprintf(name, sizeof(name), "%c_%03d.pgm", letter, i);
      save_pgm(img, (std::filesystem::path(out_dir) / name).string());

      ManifestRecord rec{name, letter, category_name(category_of(letter)),
                         table.groups[table.group_of(letter)].id, sample_seed};
      const int rank = static_cast<int>(std::find(order.begin(), order.end(), i) - order.begin());
      (rank < cfg.n_per_letter ? train : test).push_back(std::move(rec));
    }
  }

  GeneratedDataset out;
  out.train_manifest = (std::filesystem::path(out_dir) / "train_manifest.csv").string();
  out.test_manifest = (std::filesystem::path(out_dir) / "test_manifest.csv").string();
  out.train_rows = static_cast<int>(train.size());
  out.test_rows = static_cast<int>(test.size());
  write_manifest(train, out.train_manifest);
  write_manifest(test, out.test_manifest);
  return out;
}

inline std::vector<FeatureDumpRecord> extract_from_manifest(const std::string& manifest_path,
                                                            FeatureKind kind,
                                                            bool paper_literal_h1) {
  const std::string base = std::filesystem::path(manifest_path).parent_path().string();
  std::vector<FeatureDumpRecord> out;
  for (const auto& rec : read_manifest(manifest_path)) {
    const BinaryImage img = load_pgm(resolve_path(base, rec.path));
    out.push_back({rec.path, rec.label, extract_features(img, kind, paper_literal_h1)});
  }
  return out;
}

inline void cmd_extract(const std::string& manifest_path, FeatureKind kind, const RunConfig& cfg,
                        const std::string& out_path) {
  write_feature_dump(extract_from_manifest(manifest_path, kind, cfg.paper_literal_h1), out_path);
}

// Accepts either a manifest (extracts features) or a feature dump.
inline std::vector<FeatureDumpRecord> load_features_any(const std::string& path, FeatureKind kind,
                                                        const RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string first;
  std::getline(in, first);
  in.close();
  if (first == kManifestHeader) return extract_from_manifest(path, kind, cfg.paper_literal_h1);
  auto records = read_feature_dump(path);
  for (const auto& r : records)
    if (r.features.kind != kind)
      throw std::runtime_error("feature dump " + path + " holds kind '" +
                               feature_kind_name(r.features.kind) + "', expected '" +
                               feature_kind_name(kind) + "'");
  return records;
}

struct KnnEvalOutcome {
  EvalReport report;
  int train_size = 0;
  int test_size = 0;
};

inline KnnEvalOutcome knn_eval(const std::string& train_src, const std::string& test_src,
                               FeatureKind kind, const RunConfig& cfg) {
  const GroupTable table = GroupTable::from_spec(cfg.groups);
  const DistanceMetric metric = metric_from_name(cfg.metric);

  auto train_recs = load_features_any(train_src, kind, cfg);
  auto test_recs = load_features_any(test_src, kind, cfg);
  if (train_recs.empty()) throw std::domain_error("knn_eval: empty training set");
  if (test_recs.empty()) throw std::domain_error("knn_eval: empty test set");

  std::vector<FeatureVector> raw;
  for (const auto& r : train_recs) raw.push_back(r.features);
  auto [std_features, st] = standardize(raw);

  LabeledDataset train;
  train.kind = kind;
  train.standardization = st;
  for (std::size_t i = 0; i < train_recs.size(); ++i) {
    const char label = train_recs[i].label;
    train.samples.push_back({std_features[i], label, category_name(category_of(label)),
                             table.groups[table.group_of(label)].id});
  }

  ConfusionMatrix cm;
  for (const auto& r : test_recs) {
    const FeatureVector q = apply_standardization(r.features, st);
    cm.add(r.label, knn_classify(q, train, cfg.k, metric).label);
  }

  KnnEvalOutcome out;
  out.train_size = static_cast<int>(train_recs.size());
  out.test_size = static_cast<int>(test_recs.size());
  out.report = make_report(cm, table, cfg.seed, config_hash(cfg));
  out.report.extra["kind"] = feature_kind_name(kind);
  out.report.extra["k"] = std::to_string(cfg.k);
  out.report.extra["metric"] = cfg.metric;
  return out;
}

inline TreeConfig tree_config_from_run(const RunConfig& cfg) {
  TreeConfig tc;
  tc.kind = FeatureKind::full;  // the tree always trains on the full descriptor
  tc.paper_literal_h1 = cfg.paper_literal_h1;
  tc.group_table = GroupTable::from_spec(cfg.groups);
  tc.zone_top = cfg.zone_top;
  tc.zone_bottom = cfg.zone_bottom;
  tc.ascender_threshold = cfg.asc_threshold;
  tc.descender_threshold = cfg.desc_threshold;
  tc.crossing_rows = parse_fraction_list(cfg.crossing_rows);
  tc.center_mode = center_mode_from_name(cfg.centers);
  tc.per_group_cap = cfg.per_group_cap;
  tc.branch_cap = cfg.branch_cap;
  tc.training.mode = cfg.mode == "generalized" ? TrainingMode::generalized
                                               : TrainingMode::regularization;
  if (cfg.mode != "generalized" && cfg.mode != "regularization")
    throw std::invalid_argument("config: unknown mode: " + cfg.mode);
  if (cfg.beta != "auto") tc.training.beta_override = std::stod(cfg.beta);
  tc.training.eta1 = cfg.eta1;
  tc.training.eta2 = cfg.eta2;
  tc.training.epochs = cfg.epochs;
  tc.training.seed = cfg.seed;
  return tc;
}

inline std::vector<TrainingImage> load_training_images(const std::string& manifest_path) {
  const std::string base = std::filesystem::path(manifest_path).parent_path().string();
  std::vector<TrainingImage> out;
  for (const auto& rec : read_manifest(manifest_path))
    out.push_back({load_pgm(resolve_path(base, rec.path)), rec.label});
  return out;
}

inline TreeNetwork cmd_train(const std::string& manifest_path, const RunConfig& cfg) {
  return train_tree(load_training_images(manifest_path), tree_config_from_run(cfg));
}

struct TreeEvalOutcome {
  EvalReport tree_report;
  EvalReport baseline_report;  // flat KNN on the same (full) features
  double root_group_accuracy = 0.0;
  long baseline_within_group_errors = 0;
  std::optional<double> within_group_error_reduction;
};

inline TreeEvalOutcome evaluate_tree(const TreeNetwork& tree, const std::string& manifest_path,
                                     const RunConfig& cfg) {
  const auto samples = load_training_images(manifest_path);
  if (samples.empty()) throw std::domain_error("evaluate_tree: empty test set");

  ConfusionMatrix cm;
  long root_correct = 0;
  for (const auto& s : samples) {
    const ClassifyResult res = classify(s.image, tree);
    // gating soundness: the label must come from the gated group
    const int gi = tree.group_table.index_of(res.group);
    bool in_group = false;
    for (char c : tree.group_table.groups[gi].letters) in_group |= (c == res.label);
    if (!in_group) throw std::logic_error("evaluate_tree: label escaped the gated group");
    if (gi == tree.group_table.group_of(s.label)) ++root_correct;
    cm.add(s.label, res.label);
  }
  if (cm.trace() > root_correct)
    throw std::logic_error("evaluate_tree: accuracy exceeded the root-decision ceiling");

  // flat-KNN baseline over the stored training features
  LabeledDataset train;
  train.kind = tree.kind;
  train.standardization = tree.standardization;
  for (std::size_t i = 0; i < tree.train_features.size(); ++i) {
    const char label = tree.train_labels[i];
    train.samples.push_back({tree.train_features[i], label,
                             category_name(category_of(label)),
                             tree.group_table.groups[tree.group_table.group_of(label)].id});
  }
  const DistanceMetric metric = metric_from_name(cfg.metric);
  ConfusionMatrix base_cm;
  for (const auto& s : samples) {
    const FeatureVector raw = extract_features(s.image, tree.kind, tree.paper_literal_h1);
    const FeatureVector q = apply_standardization(raw, tree.standardization);
    base_cm.add(s.label, knn_classify(q, train, cfg.k, metric).label);
  }

  TreeEvalOutcome out;
  out.root_group_accuracy =
      std::round(10000.0 * root_correct / static_cast<double>(samples.size())) / 100.0;
  out.baseline_report = make_report(base_cm, tree.group_table, cfg.seed, config_hash(cfg));
  out.tree_report = make_report(cm, tree.group_table, cfg.seed, config_hash(cfg));
  out.baseline_within_group_errors = out.baseline_report.within_group_error_count;
  out.within_group_error_reduction = error_reduction(out.baseline_within_group_errors,
                                                     out.tree_report.within_group_error_count);

  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", out.root_group_accuracy);
  out.tree_report.extra["root_group_accuracy"] = buf;
  std::snprintf(buf, sizeof(buf), "%.2f", out.baseline_report.accuracy_percent);
  out.tree_report.extra["baseline_knn_accuracy"] = buf;
  out.tree_report.extra["baseline_within_group_errors"] =
      std::to_string(out.baseline_within_group_errors);
  if (out.within_group_error_reduction) {
    std::snprintf(buf, sizeof(buf), "%.2f", *out.within_group_error_reduction);
    out.tree_report.extra["within_group_error_reduction"] = buf;
  } else {
    out.tree_report.extra["within_group_error_reduction"] = "n/a";
  }
  return out;
}

struct Prediction {
  ClassifyResult result;
};

inline Prediction cmd_predict(const TreeNetwork& tree, const std::string& image_path) {
  return {classify(load_pgm(image_path), tree)};
}

inline std::string inspect_moments_text(const BinaryImage& img, bool paper_literal_h1) {
  const MomentSet ms = compute_moments(img);
  const HuDescriptor hu = hu_moments(ms, paper_literal_h1);
  const DiskMapping dm = disk_mapping(img, ms);
  const ZernikeDescriptor z = zernike_moments(ms, dm);
  const AffineDescriptor a = affine_moments(ms);

  std::ostringstream os;
  os.precision(12);
  os << "image " << img.width << "x" << img.height << ", ink " << img.ink_count() << "\n";
  os << "centroid " << ms.centroid_x << " " << ms.centroid_y << "\n";
  for (int p = 0; p <= ms.max_order; ++p)
    for (int q = 0; p + q <= ms.max_order; ++q)
      os << "m" << p << q << "=" << ms.m(p, q) << " mu" << p << q << "=" << ms.mu(p, q)
         << (p + q >= 2 ? " n" + std::to_string(p) + std::to_string(q) + "=" +
                              std::to_string(ms.n(p, q))
                        : "")
         << "\n";
  os << "hu H1=" << hu.h1 << " H2=" << hu.h2 << " H3=" << hu.h3 << " H4=" << hu.h4 << "\n";
  os << "zernike Z00=" << z.z00 << " |Z22|=" << std::abs(z.z22) << " Z20=" << z.z20
     << " |Z33|=" << std::abs(z.z33) << " |Z31|=" << std::abs(z.z31) << " |Z44|=" << std::abs(z.z44)
     << "\n";
  os << "affine A1=" << a.a1 << " A2=" << a.a2 << " A3=" << a.a3 << "\n";
  os << "disk radius " << dm.radius << "\n";
  return os.str();
}

}  // namespace mrbf
