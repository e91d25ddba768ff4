// Dataset manifest (CSV with header) and feature dump files.
//   manifest: path,label,category,group,seed
//   dump:     path,label,kind,v1,...,vK   (17 significant digits)
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrbf/groups.hpp"
#include "mrbf/moments.hpp"

namespace mrbf {

struct ManifestRecord {
  std::string path;
  char label = 0;
  std::string category;
  std::string group;
  std::uint64_t seed = 0;
};

inline const char* kManifestHeader = "path,label,category,group,seed";

inline void write_manifest(const std::vector<ManifestRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("manifest: cannot write " + path);
  out << kManifestHeader << "\n";
  for (const auto& r : records) {
    if (r.path.find(',') != std::string::npos)
      throw std::invalid_argument("manifest: comma in path: " + r.path);
    out << r.path << "," << r.label << "," << r.category << "," << r.group << "," << r.seed
        << "\n";
  }
  if (!out) throw std::runtime_error("manifest: write failed for " + path);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) fields.push_back(tok);
  return fields;
}

inline std::vector<ManifestRecord> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader)
    throw std::runtime_error("manifest: missing or bad header in " + path);
  std::vector<ManifestRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 5 || f[1].size() != 1)
      throw std::runtime_error("manifest: malformed row: " + line);
    records.push_back({f[0], f[1][0], f[2], f[3], std::stoull(f[4])});
  }
  return records;
}

struct FeatureDumpRecord {
  std::string path;
  char label = 0;
  FeatureVector features;
};

inline void write_feature_dump(const std::vector<FeatureDumpRecord>& records,
                               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("feature dump: cannot write " + path);
  char buf[40];
  for (const auto& r : records) {
    out << r.path << "," << r.label << "," << feature_kind_name(r.features.kind);
    for (double v : r.features.values) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("feature dump: write failed for " + path);
}

inline std::vector<FeatureDumpRecord> read_feature_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("feature dump: cannot open " + path);
  std::vector<FeatureDumpRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() < 4 || f[1].size() != 1)
      throw std::runtime_error("feature dump: malformed row: " + line);
    FeatureDumpRecord r;
    r.path = f[0];
    r.label = f[1][0];
    r.features.kind = feature_kind_from_name(f[2]);
    for (std::size_t i = 3; i < f.size(); ++i) r.features.values.push_back(std::stod(f[i]));
    if (static_cast<int>(r.features.values.size()) != feature_length(r.features.kind))
      throw std::runtime_error("feature dump: value count does not match kind in: " + line);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace mrbf
