// The gated tree classifier: a root decision (category by zone masses, group
// by structural features + nearest group centroid) drives +1/-1 gates that
// enable exactly one RBF branch; the final label is the argmax of the enabled
// branch's scores merged into the 26-letter score list.
#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrbf/glyphs.hpp"
#include "mrbf/groups.hpp"
#include "mrbf/knn.hpp"
#include "mrbf/moments.hpp"
#include "mrbf/raster.hpp"
#include "mrbf/rbf.hpp"

namespace mrbf {

using GateVector = std::vector<int>;  // one +1, the rest -1

struct RootModel {
  double zone_top = 0.25;          // band fractions of image height
  double zone_bottom = 0.75;
  double ascender_threshold = 0.05;   // fraction of total ink
  double descender_threshold = 0.05;
  std::vector<double> crossing_rows = {0.40, 0.52, 0.64};
  Standardization struct_standardization;  // over structural dims
  // One prototype per letter over [standardized moments ++ structure]; a
  // group's distance is the minimum over its letters. A single centroid per
  // group misroutes heterogeneous groups (a {p,y} mean matches neither).
  std::array<std::vector<double>, 26> letter_centroids;
};

struct TreeNetwork {
  int format_version = 1;
  FeatureKind kind = FeatureKind::full;
  bool paper_literal_h1 = false;
  GroupTable group_table;
  Standardization standardization;  // over moment features
  RootModel root;
  std::vector<RbfBranch> branches;  // aligned with group_table.groups
  // Training set kept for the flat-KNN baseline reported by eval.
  std::vector<FeatureVector> train_features;  // standardized
  std::vector<char> train_labels;
};

// Structural probe used by the root's group decision: hole count, crossing
// counts at the configured rows, and the zone mass fractions. Expects the
// despeckled raster the classifier works on: one flipped pixel inside a
// stroke would otherwise count as a hole and every speck on a scan row as a
// crossing.
inline std::vector<double> structural_features(const BinaryImage& img, const RootModel& root) {
  const int top = std::max(1, static_cast<int>(std::lround(root.zone_top * img.height)));
  const int bottom =
      std::min(img.height - 1, static_cast<int>(std::lround(root.zone_bottom * img.height)));
  const ZoneProfile zp = zone_profile(img, top, bottom);
  const double total = static_cast<double>(zp.total());
  if (total <= 0.0) throw std::domain_error("structural_features: image has no ink");

  std::vector<double> f;
  f.push_back(static_cast<double>(count_holes(img)));
  for (int c : crossing_counts(img, root.crossing_rows)) f.push_back(static_cast<double>(c));
  f.push_back(zp.ascender_mass / total);
  f.push_back(zp.descender_mass / total);
  return f;
}

inline Category decide_category(const BinaryImage& raw, const RootModel& root) {
  const BinaryImage img = despeckle(raw);
  const int top = std::max(1, static_cast<int>(std::lround(root.zone_top * img.height)));
  const int bottom =
      std::min(img.height - 1, static_cast<int>(std::lround(root.zone_bottom * img.height)));
  const ZoneProfile zp = zone_profile(img, top, bottom);
  const double total = static_cast<double>(zp.total());
  if (total <= 0.0) throw std::domain_error("decide_category: image has no ink");
  const bool asc = zp.ascender_mass > root.ascender_threshold * total;
  const bool desc = zp.descender_mass > root.descender_threshold * total;
  if (asc && desc) return Category::ascendant_descendent;
  if (asc) return Category::ascendant;
  if (desc) return Category::descendent;
  return Category::central;
}

struct RootDecision {
  Category category = Category::central;
  int group = -1;
  GateVector gates;
};

// First two classification steps: category from the zone profile, group from
// the nearest group centroid over [standardized moments ++ structure],
// restricted to the category's groups.
inline RootDecision root_decide(const BinaryImage& img, const FeatureVector& standardized,
                                const TreeNetwork& tree) {
  RootDecision d;
  d.category = decide_category(img, tree.root);

  std::vector<double> s = structural_features(img, tree.root);
  FeatureVector sf{std::move(s), tree.kind};
  sf = apply_standardization(sf, tree.root.struct_standardization);

  std::vector<double> aug = standardized.values;
  aug.insert(aug.end(), sf.values.begin(), sf.values.end());

  const std::vector<int> candidates = tree.group_table.groups_in_category(d.category);
  if (candidates.empty()) throw std::domain_error("root_decide: category has no groups");
  double best = std::numeric_limits<double>::infinity();
  for (int gi : candidates) {
    for (char letter : tree.group_table.groups[gi].letters) {
      const auto& centroid = tree.root.letter_centroids[letter - 'a'];
      double d2 = 0.0;
      for (std::size_t i = 0; i < aug.size(); ++i) {
        const double diff = aug[i] - centroid[i];
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        d.group = gi;
      }
    }
  }

  d.gates.assign(tree.group_table.groups.size(), -1);
  d.gates[d.group] = +1;
  return d;
}

// Merge per-branch scores into a 26-letter score list; letters of branches
// gated -1 are excluded with -inf.
inline std::vector<double> gate_apply(const GateVector& gates,
                                      const std::vector<std::vector<double>>& branch_scores,
                                      const GroupTable& table) {
  if (gates.size() != table.groups.size() || branch_scores.size() != table.groups.size())
    throw std::invalid_argument("gate_apply: gate/branch count mismatch");
  std::vector<double> merged(26, -std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < gates.size(); ++b) {
    if (gates[b] != +1) continue;
    const auto& letters = table.groups[b].letters;
    if (branch_scores[b].size() != letters.size())
      throw std::invalid_argument("gate_apply: score count does not match group size");
    for (std::size_t i = 0; i < letters.size(); ++i)
      merged[letters[i] - 'a'] = branch_scores[b][i];
  }
  return merged;
}

struct ClassifyResult {
  char label = 0;
  Category category = Category::central;
  std::string group;
  std::vector<double> scores;  // 26 merged scores
};

// Full pipeline with an optional forced group (oracle gating for tests).
inline ClassifyResult classify_gated(const BinaryImage& img, const TreeNetwork& tree,
                                     std::optional<int> forced_group = std::nullopt) {
  const FeatureVector raw = extract_features(img, tree.kind, tree.paper_literal_h1);
  const FeatureVector std_fv = apply_standardization(raw, tree.standardization);

  RootDecision root = root_decide(img, std_fv, tree);
  if (forced_group) {
    root.group = *forced_group;
    root.gates.assign(tree.group_table.groups.size(), -1);
    root.gates[root.group] = +1;
  }

  // only the enabled branch is evaluated
  std::vector<std::vector<double>> scores(tree.branches.size());
  scores[root.group] = branch_forward(std_fv.values, tree.branches[root.group]);

  ClassifyResult res;
  res.scores = gate_apply(root.gates, scores, tree.group_table);
  res.category = root.category;
  res.group = tree.group_table.groups[root.group].id;
  int best = 0;
  for (int i = 1; i < 26; ++i)
    if (res.scores[i] > res.scores[best]) best = i;
  res.label = static_cast<char>('a' + best);
  return res;
}

inline ClassifyResult classify(const BinaryImage& img, const TreeNetwork& tree) {
  return classify_gated(img, tree);
}

// ---------------------------------------------------------------------------
// Training.

struct TreeConfig {
  FeatureKind kind = FeatureKind::full;
  bool paper_literal_h1 = false;
  GroupTable group_table = GroupTable::defaults();
  double zone_top = 0.25;
  double zone_bottom = 0.75;
  double ascender_threshold = 0.05;
  double descender_threshold = 0.05;
  std::vector<double> crossing_rows = {0.40, 0.52, 0.64};
  CenterMode center_mode = CenterMode::class_means;
  int per_group_cap = 16;
  int branch_cap = 37;
  TrainingConfig training;
};

struct TrainingImage {
  BinaryImage image;
  char label = 0;
};

inline TreeNetwork train_tree(const std::vector<TrainingImage>& dataset, const TreeConfig& config) {
  std::array<int, 26> label_count{};
  for (const auto& s : dataset) {
    if (s.label < 'a' || s.label > 'z')
      throw std::runtime_error("train_tree: dataset error: bad label");
    ++label_count[s.label - 'a'];
  }
  for (int i = 0; i < 26; ++i)
    if (!label_count[i])
      throw std::runtime_error(std::string("train_tree: dataset error: missing letter '") +
                               static_cast<char>('a' + i) + "'");

  TreeNetwork tree;
  tree.kind = config.kind;
  tree.paper_literal_h1 = config.paper_literal_h1;
  tree.group_table = config.group_table;
  tree.root.zone_top = config.zone_top;
  tree.root.zone_bottom = config.zone_bottom;
  tree.root.ascender_threshold = config.ascender_threshold;
  tree.root.descender_threshold = config.descender_threshold;
  tree.root.crossing_rows = config.crossing_rows;

  // moment features, standardized over the training set
  std::vector<FeatureVector> raw;
  raw.reserve(dataset.size());
  for (const auto& s : dataset)
    raw.push_back(extract_features(s.image, config.kind, config.paper_literal_h1));
  auto [features, standardization] = standardize(raw);
  tree.standardization = std::move(standardization);

  // structural features, with their own standardization
  std::vector<FeatureVector> sraw;
  sraw.reserve(dataset.size());
  for (const auto& s : dataset)
    sraw.push_back(FeatureVector{structural_features(s.image, tree.root), config.kind});
  auto [sfeatures, sstd] = standardize(sraw);
  tree.root.struct_standardization = std::move(sstd);

  // per-letter prototypes over the augmented vectors
  const std::size_t ngroups = tree.group_table.groups.size();
  const std::size_t aug_dim = features[0].values.size() + sfeatures[0].values.size();
  for (auto& c : tree.root.letter_centroids) c.assign(aug_dim, 0.0);
  for (std::size_t j = 0; j < dataset.size(); ++j) {
    auto& c = tree.root.letter_centroids[dataset[j].label - 'a'];
    for (std::size_t i = 0; i < features[j].values.size(); ++i) c[i] += features[j].values[i];
    for (std::size_t i = 0; i < sfeatures[j].values.size(); ++i)
      c[features[j].values.size() + i] += sfeatures[j].values[i];
  }
  for (int li = 0; li < 26; ++li)
    for (double& v : tree.root.letter_centroids[li]) v /= label_count[li];

  // branches are trained independently on their group's samples
  tree.branches.resize(ngroups);
  for (std::size_t gi = 0; gi < ngroups; ++gi) {
    const Group& group = tree.group_table.groups[gi];

    LabeledDataset branch_set;
    branch_set.kind = config.kind;
    std::vector<char> labels;
    std::vector<std::vector<double>> inputs;
    for (std::size_t j = 0; j < dataset.size(); ++j) {
      if (tree.group_table.group_of(dataset[j].label) != static_cast<int>(gi)) continue;
      branch_set.samples.push_back({features[j], dataset[j].label,
                                    category_name(group.category), group.id});
      labels.push_back(dataset[j].label);
      inputs.push_back(features[j].values);
    }

    const int cap = std::min(config.per_group_cap, config.branch_cap);
    const std::uint64_t branch_seed = mix_seed(config.training.seed, gi);
    std::vector<ClusterCenter> centers =
        cluster_centers(branch_set, config.center_mode, cap, branch_seed, group.letters);

    RbfBranch branch;
    branch.output_labels = group.letters;
    for (auto& c : centers) branch.centers.push_back(std::move(c.position));
    if (static_cast<int>(branch.centers.size()) > config.branch_cap)
      throw std::runtime_error("train_tree: branch '" + group.id + "' exceeds the hidden unit cap");
    branch.beta = config.training.beta_override ? *config.training.beta_override
                                                : default_beta(branch.centers);

    const Matrix targets = make_one_hot(labels, group.letters);
    try {
      branch = train_regularization(inputs, targets, std::move(branch));
      if (config.training.mode == TrainingMode::generalized)
        branch = train_generalized(inputs, targets, std::move(branch), config.training).branch;
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("train_tree: training error in branch '" + group.id +
                               "': " + e.what());
    }
    tree.branches[gi] = std::move(branch);
  }

  for (std::size_t j = 0; j < dataset.size(); ++j) {
    tree.train_features.push_back(features[j]);
    tree.train_labels.push_back(dataset[j].label);
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Model file: text, line oriented, header "MRBF 1".

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_values(std::ostream& os, const std::vector<double>& vs) {
  for (std::size_t i = 0; i < vs.size(); ++i) os << (i ? " " : "") << fmt_double(vs[i]);
  os << "\n";
}

inline std::vector<double> read_values(std::istream& is, std::size_t n, const char* what) {
  std::vector<double> vs(n);
  for (auto& v : vs)
    if (!(is >> v)) throw std::runtime_error(std::string("model: truncated ") + what);
  return vs;
}

inline void expect_token(std::istream& is, const std::string& want) {
  std::string tok;
  if (!(is >> tok) || tok != want)
    throw std::runtime_error("model: expected '" + want + "', got '" + tok + "'");
}

}  // namespace detail

inline void save_tree(const TreeNetwork& tree, std::ostream& os) {
  os << "MRBF " << tree.format_version << "\n";
  os << "KIND " << feature_kind_name(tree.kind) << " " << (tree.paper_literal_h1 ? 1 : 0) << "\n";

  os << "STANDARDIZATION " << tree.standardization.mean.size() << "\n";
  detail::write_values(os, tree.standardization.mean);
  detail::write_values(os, tree.standardization.scale);

  os << "GROUPS " << tree.group_table.to_spec() << "\n";

  os << "ROOT " << detail::fmt_double(tree.root.zone_top) << " "
     << detail::fmt_double(tree.root.zone_bottom) << " "
     << detail::fmt_double(tree.root.ascender_threshold) << " "
     << detail::fmt_double(tree.root.descender_threshold) << "\n";
  os << "CROSSINGS " << tree.root.crossing_rows.size() << "\n";
  detail::write_values(os, tree.root.crossing_rows);
  os << "STRUCT_STANDARDIZATION " << tree.root.struct_standardization.mean.size() << "\n";
  detail::write_values(os, tree.root.struct_standardization.mean);
  detail::write_values(os, tree.root.struct_standardization.scale);
  for (int li = 0; li < 26; ++li) {
    os << "CENTROID " << static_cast<char>('a' + li) << " "
       << tree.root.letter_centroids[li].size() << "\n";
    detail::write_values(os, tree.root.letter_centroids[li]);
  }

  os << "TRAINSET " << tree.train_features.size() << " "
     << (tree.train_features.empty() ? 0 : tree.train_features[0].values.size()) << "\n";
  for (std::size_t j = 0; j < tree.train_features.size(); ++j) {
    os << tree.train_labels[j] << " ";
    detail::write_values(os, tree.train_features[j].values);
  }

  for (std::size_t gi = 0; gi < tree.branches.size(); ++gi) {
    const RbfBranch& b = tree.branches[gi];
    os << "BRANCH " << tree.group_table.groups[gi].id << " " << b.centers.size() << " "
       << b.weights.cols << " " << detail::fmt_double(b.beta) << "\n";
    for (const auto& c : b.centers) detail::write_values(os, c);
    for (int r = 0; r < b.weights.rows; ++r) {
      std::vector<double> row(b.weights.cols);
      for (int c = 0; c < b.weights.cols; ++c) row[c] = b.weights(r, c);
      detail::write_values(os, row);
    }
  }
  os << "END\n";
}

inline void save_tree(const TreeNetwork& tree, const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // binary keeps \n bytes stable
  if (!os) throw std::runtime_error("model: cannot write " + path);
  save_tree(tree, os);
  if (!os) throw std::runtime_error("model: write failed for " + path);
}

inline TreeNetwork load_tree(std::istream& is) {
  std::string magic;
  int version = -1;
  if (!(is >> magic >> version) || magic != "MRBF")
    throw std::runtime_error("model: not an MRBF model file");
  if (version != 1)
    throw std::runtime_error("model: unsupported format version " + std::to_string(version));

  TreeNetwork tree;
  tree.format_version = version;

  detail::expect_token(is, "KIND");
  std::string kind_name;
  int literal = 0;
  is >> kind_name >> literal;
  tree.kind = feature_kind_from_name(kind_name);
  tree.paper_literal_h1 = literal != 0;

  detail::expect_token(is, "STANDARDIZATION");
  std::size_t dim = 0;
  is >> dim;
  tree.standardization.mean = detail::read_values(is, dim, "standardization mean");
  tree.standardization.scale = detail::read_values(is, dim, "standardization scale");

  detail::expect_token(is, "GROUPS");
  std::string spec;
  is >> spec;
  tree.group_table = GroupTable::from_spec(spec);

  detail::expect_token(is, "ROOT");
  is >> tree.root.zone_top >> tree.root.zone_bottom >> tree.root.ascender_threshold >>
      tree.root.descender_threshold;
  detail::expect_token(is, "CROSSINGS");
  std::size_t ncross = 0;
  is >> ncross;
  tree.root.crossing_rows = detail::read_values(is, ncross, "crossing rows");
  detail::expect_token(is, "STRUCT_STANDARDIZATION");
  std::size_t sdim = 0;
  is >> sdim;
  tree.root.struct_standardization.mean = detail::read_values(is, sdim, "struct mean");
  tree.root.struct_standardization.scale = detail::read_values(is, sdim, "struct scale");

  for (int li = 0; li < 26; ++li) {
    detail::expect_token(is, "CENTROID");
    char letter = 0;
    std::size_t cdim = 0;
    is >> letter >> cdim;
    if (letter < 'a' || letter > 'z') throw std::runtime_error("model: bad centroid letter");
    tree.root.letter_centroids[letter - 'a'] = detail::read_values(is, cdim, "centroid");
  }

  detail::expect_token(is, "TRAINSET");
  std::size_t nrows = 0, fdim = 0;
  is >> nrows >> fdim;
  for (std::size_t j = 0; j < nrows; ++j) {
    char label = 0;
    is >> label;
    tree.train_labels.push_back(label);
    tree.train_features.push_back(
        FeatureVector{detail::read_values(is, fdim, "trainset row"), tree.kind});
  }

  tree.branches.resize(tree.group_table.groups.size());
  for (std::size_t gi = 0; gi < tree.group_table.groups.size(); ++gi) {
    detail::expect_token(is, "BRANCH");
    std::string id;
    std::size_t m = 0, c = 0;
    double beta = 0.0;
    is >> id >> m >> c >> beta;
    const int bi = tree.group_table.index_of(id);
    RbfBranch& b = tree.branches[bi];
    b.beta = beta;
    b.output_labels = tree.group_table.groups[bi].letters;
    if (c != b.output_labels.size())
      throw std::runtime_error("model: branch '" + id + "' output count mismatch");
    for (std::size_t i = 0; i < m; ++i)
      b.centers.push_back(detail::read_values(is, dim, "branch center"));
    b.input_dim = static_cast<int>(dim);
    b.weights = Matrix(static_cast<int>(m), static_cast<int>(c));
    for (std::size_t r = 0; r < m; ++r) {
      auto row = detail::read_values(is, c, "branch weights");
      for (std::size_t k = 0; k < c; ++k) b.weights(static_cast<int>(r), static_cast<int>(k)) = row[k];
    }
  }
  detail::expect_token(is, "END");
  return tree;
}

inline TreeNetwork load_tree(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("model: cannot open " + path);
  return load_tree(is);
}

}  // namespace mrbf
