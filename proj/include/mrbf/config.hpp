// Flat key=value run configuration. Every key has a documented default,
// unknown keys are rejected, and the effective configuration can be echoed
// back out in a stable order (reports embed it as cfg.* lines).
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrbf {

struct RunConfig {
  // dataset generation
  std::uint64_t seed = 1;
  int n_per_letter = 10;
  int canvas = 96;
  double stroke_width = 0.085;
  double margin = 0.06;
  double jitter_rotate = 8.0;     // max |degrees|
  double jitter_scale = 0.08;     // scale drawn from [1-j, 1+j] per axis
  double jitter_shear = 0.06;
  double jitter_translate = 2.0;  // max |pixels|
  double noise_rate = 0.01;

  // knn
  int k = 3;
  std::string metric = "euclidean";
  std::string kind = "mixed";

  // moments
  bool paper_literal_h1 = false;

  // rbf / tree
  std::string mode = "regularization";  // or "generalized"
  std::string beta = "auto";            // "auto" or a positive number
  double eta1 = 0.001;
  double eta2 = 0.001;
  int epochs = 50;
  int branch_cap = 37;
  std::string centers = "class_means";  // or "random_subset"
  int per_group_cap = 16;

  // root decision
  double zone_top = 0.25;
  double zone_bottom = 0.75;
  double asc_threshold = 0.05;
  double desc_threshold = 0.05;
  std::string crossing_rows = "0.40,0.52,0.64";
  std::string groups = "ao,cers,mnuvw,xz,bd,hk,ilt,gq,py,fj";
};

namespace config_detail {

inline bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw std::invalid_argument("config: bad boolean value: " + v);
}

struct Key {
  const char* name;
  std::string (*get)(const RunConfig&);
  void (*set)(RunConfig&, const std::string&);
};

inline std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// stable declaration order = echo order
inline const std::vector<Key>& keys() {
  static const std::vector<Key> ks = {
      {"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
      {"n_per_letter", [](const RunConfig& c) { return std::to_string(c.n_per_letter); },
       [](RunConfig& c, const std::string& v) { c.n_per_letter = std::stoi(v); }},
      {"canvas", [](const RunConfig& c) { return std::to_string(c.canvas); },
       [](RunConfig& c, const std::string& v) { c.canvas = std::stoi(v); }},
      {"stroke_width", [](const RunConfig& c) { return fmt_num(c.stroke_width); },
       [](RunConfig& c, const std::string& v) { c.stroke_width = std::stod(v); }},
      {"margin", [](const RunConfig& c) { return fmt_num(c.margin); },
       [](RunConfig& c, const std::string& v) { c.margin = std::stod(v); }},
      {"jitter_rotate", [](const RunConfig& c) { return fmt_num(c.jitter_rotate); },
       [](RunConfig& c, const std::string& v) { c.jitter_rotate = std::stod(v); }},
      {"jitter_scale", [](const RunConfig& c) { return fmt_num(c.jitter_scale); },
       [](RunConfig& c, const std::string& v) { c.jitter_scale = std::stod(v); }},
      {"jitter_shear", [](const RunConfig& c) { return fmt_num(c.jitter_shear); },
       [](RunConfig& c, const std::string& v) { c.jitter_shear = std::stod(v); }},
      {"jitter_translate", [](const RunConfig& c) { return fmt_num(c.jitter_translate); },
       [](RunConfig& c, const std::string& v) { c.jitter_translate = std::stod(v); }},
      {"noise_rate", [](const RunConfig& c) { return fmt_num(c.noise_rate); },
       [](RunConfig& c, const std::string& v) { c.noise_rate = std::stod(v); }},
      {"k", [](const RunConfig& c) { return std::to_string(c.k); },
       [](RunConfig& c, const std::string& v) { c.k = std::stoi(v); }},
      {"metric", [](const RunConfig& c) { return c.metric; },
       [](RunConfig& c, const std::string& v) { c.metric = v; }},
      {"kind", [](const RunConfig& c) { return c.kind; },
       [](RunConfig& c, const std::string& v) { c.kind = v; }},
      {"paper_literal_h1",
       [](const RunConfig& c) { return std::string(c.paper_literal_h1 ? "1" : "0"); },
       [](RunConfig& c, const std::string& v) { c.paper_literal_h1 = parse_bool(v); }},
      {"mode", [](const RunConfig& c) { return c.mode; },
       [](RunConfig& c, const std::string& v) { c.mode = v; }},
      {"beta", [](const RunConfig& c) { return c.beta; },
       [](RunConfig& c, const std::string& v) { c.beta = v; }},
      {"eta1", [](const RunConfig& c) { return fmt_num(c.eta1); },
       [](RunConfig& c, const std::string& v) { c.eta1 = std::stod(v); }},
      {"eta2", [](const RunConfig& c) { return fmt_num(c.eta2); },
       [](RunConfig& c, const std::string& v) { c.eta2 = std::stod(v); }},
      {"epochs", [](const RunConfig& c) { return std::to_string(c.epochs); },
       [](RunConfig& c, const std::string& v) { c.epochs = std::stoi(v); }},
      {"branch_cap", [](const RunConfig& c) { return std::to_string(c.branch_cap); },
       [](RunConfig& c, const std::string& v) { c.branch_cap = std::stoi(v); }},
      {"centers", [](const RunConfig& c) { return c.centers; },
       [](RunConfig& c, const std::string& v) { c.centers = v; }},
      {"per_group_cap", [](const RunConfig& c) { return std::to_string(c.per_group_cap); },
       [](RunConfig& c, const std::string& v) { c.per_group_cap = std::stoi(v); }},
      {"zone_top", [](const RunConfig& c) { return fmt_num(c.zone_top); },
       [](RunConfig& c, const std::string& v) { c.zone_top = std::stod(v); }},
      {"zone_bottom", [](const RunConfig& c) { return fmt_num(c.zone_bottom); },
       [](RunConfig& c, const std::string& v) { c.zone_bottom = std::stod(v); }},
      {"asc_threshold", [](const RunConfig& c) { return fmt_num(c.asc_threshold); },
       [](RunConfig& c, const std::string& v) { c.asc_threshold = std::stod(v); }},
      {"desc_threshold", [](const RunConfig& c) { return fmt_num(c.desc_threshold); },
       [](RunConfig& c, const std::string& v) { c.desc_threshold = std::stod(v); }},
      {"crossing_rows", [](const RunConfig& c) { return c.crossing_rows; },
       [](RunConfig& c, const std::string& v) { c.crossing_rows = v; }},
      {"groups", [](const RunConfig& c) { return c.groups; },
       [](RunConfig& c, const std::string& v) { c.groups = v; }},
  };
  return ks;
}

}  // namespace config_detail

inline void config_set(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : config_detail::keys())
    if (key == k.name) {
      k.set(cfg, value);
      return;
    }
  throw std::invalid_argument("config: unknown key: " + key);
}

inline std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> items;
  for (const auto& k : config_detail::keys()) items.emplace_back(k.name, k.get(cfg));
  return items;
}

inline std::string render_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_items(cfg)) out += k + "=" + v + "\n";
  return out;
}

// Accepts bare keys and cfg.-prefixed keys; lines from other report
// namespaces (metric./extra./per_/confusion./accuracy etc.) are skipped so a
// full machine report can be fed back in as a config file.
inline void load_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config: missing '=' in: " + line);
    std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key.rfind("cfg.", 0) == 0) key = key.substr(4);
    else if (key.rfind("extra.", 0) == 0 || key.rfind("per_category.", 0) == 0 ||
             key.rfind("per_group.", 0) == 0 || key.rfind("confusion.", 0) == 0 ||
             key == "accuracy" || key == "within_group_errors" || key == "config_hash")
      continue;
    config_set(cfg, key, value);
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  load_config_text(cfg, buf.str());
}

// FNV-1a over the canonical echo; pins a run's effective configuration.
inline std::string config_hash(const RunConfig& cfg) {
  const std::string text = render_config(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::vector<double> parse_fraction_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::invalid_argument("config: empty fraction list");
  return out;
}

}  // namespace mrbf
