// Confusion matrices, accuracy/within-group-error metrics and report
// rendering (plain two-column tables and machine-readable key=value lines).
#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrbf/groups.hpp"

namespace mrbf {

struct ConfusionMatrix {
  std::array<std::array<long, 26>, 26> counts{};  // [true][predicted]

  void add(char truth, char predicted) {
    if (truth < 'a' || truth > 'z' || predicted < 'a' || predicted > 'z')
      throw std::invalid_argument("ConfusionMatrix: label outside a..z");
    ++counts[truth - 'a'][predicted - 'a'];
  }

  long total() const {
    long t = 0;
    for (const auto& row : counts)
      for (long v : row) t += v;
    return t;
  }

  long trace() const {
    long t = 0;
    for (int i = 0; i < 26; ++i) t += counts[i][i];
    return t;
  }
};

// Correct-classification percentage at the paper's 2-decimal precision.
inline double accuracy(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total == 0) throw std::domain_error("accuracy: empty confusion matrix");
  return std::round(10000.0 * cm.trace() / total) / 100.0;
}

// Off-diagonal counts where the true and predicted letters share a group.
inline long within_group_errors(const ConfusionMatrix& cm, const GroupTable& table) {
  long n = 0;
  for (int t = 0; t < 26; ++t)
    for (int p = 0; p < 26; ++p) {
      if (t == p) continue;
      if (table.group_of(static_cast<char>('a' + t)) == table.group_of(static_cast<char>('a' + p)))
        n += cm.counts[t][p];
    }
  return n;
}

// 100 * (baseline - method) / baseline; not applicable when baseline is zero.
inline std::optional<double> error_reduction(long baseline_errors, long method_errors) {
  if (baseline_errors < 0 || method_errors < 0)
    throw std::invalid_argument("error_reduction: negative counts");
  if (baseline_errors == 0) return std::nullopt;
  return std::round(10000.0 * (baseline_errors - method_errors) / baseline_errors) / 100.0;
}

struct EvalReport {
  double accuracy_percent = 0.0;
  std::map<std::string, double> per_category;  // category name -> accuracy %
  std::map<std::string, double> per_group;     // group id -> accuracy %
  long within_group_error_count = 0;
  ConfusionMatrix confusion;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, std::string> extra;  // named side metrics, e.g. baselines
};

inline EvalReport make_report(const ConfusionMatrix& cm, const GroupTable& table,
                              std::uint64_t seed, const std::string& config_hash) {
  EvalReport r;
  r.confusion = cm;
  r.accuracy_percent = accuracy(cm);
  r.within_group_error_count = within_group_errors(cm, table);
  r.seed = seed;
  r.config_hash = config_hash;

  std::map<std::string, std::pair<long, long>> cat, grp;  // -> (correct, total)
  for (int t = 0; t < 26; ++t) {
    const char letter = static_cast<char>('a' + t);
    const std::string cname = category_name(category_of(letter));
    const std::string gname = table.groups[table.group_of(letter)].id;
    for (int p = 0; p < 26; ++p) {
      const long n = cm.counts[t][p];
      cat[cname].second += n;
      grp[gname].second += n;
      if (t == p) {
        cat[cname].first += n;
        grp[gname].first += n;
      }
    }
  }
  for (const auto& [name, c] : cat)
    if (c.second) r.per_category[name] = std::round(10000.0 * c.first / c.second) / 100.0;
  for (const auto& [name, c] : grp)
    if (c.second) r.per_group[name] = std::round(10000.0 * c.first / c.second) / 100.0;
  return r;
}

enum class ReportFormat { plain_table, machine };

namespace detail {

inline std::string fmt_2dp(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

inline std::string render_report(const EvalReport& r, ReportFormat format) {
  std::ostringstream os;
  if (format == ReportFormat::plain_table) {
    os << std::left << std::setw(28) << "Measure" << "Value\n";
    os << std::left << std::setw(28) << "Correct Classification [%]"
       << detail::fmt_2dp(r.accuracy_percent) << "\n";
    os << std::left << std::setw(28) << "Within-group errors" << r.within_group_error_count
       << "\n";
    for (const auto& [name, v] : r.per_category)
      os << std::left << std::setw(28) << ("Category " + name) << detail::fmt_2dp(v) << "\n";
    for (const auto& [name, v] : r.per_group)
      os << std::left << std::setw(28) << ("Group " + name) << detail::fmt_2dp(v) << "\n";
    for (const auto& [key, v] : r.extra) os << std::left << std::setw(28) << key << v << "\n";
    return os.str();
  }
  if (format != ReportFormat::machine) throw std::invalid_argument("render_report: unknown format");

  os << "accuracy=" << detail::fmt_2dp(r.accuracy_percent) << "\n";
  os << "within_group_errors=" << r.within_group_error_count << "\n";
  for (const auto& [name, v] : r.per_category)
    os << "per_category." << name << "=" << detail::fmt_2dp(v) << "\n";
  for (const auto& [name, v] : r.per_group)
    os << "per_group." << name << "=" << detail::fmt_2dp(v) << "\n";
  for (const auto& [key, v] : r.extra) os << "extra." << key << "=" << v << "\n";
  os << "seed=" << r.seed << "\n";
  os << "config_hash=" << r.config_hash << "\n";
  for (int t = 0; t < 26; ++t)
    for (int p = 0; p < 26; ++p)
      if (r.confusion.counts[t][p])
        os << "confusion." << static_cast<char>('a' + t) << "." << static_cast<char>('a' + p)
           << "=" << r.confusion.counts[t][p] << "\n";
  return os.str();
}

inline EvalReport parse_report(const std::string& text) {
  EvalReport r;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("report: missing '=' in: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "accuracy")
      r.accuracy_percent = std::stod(value);
    else if (key == "within_group_errors")
      r.within_group_error_count = std::stol(value);
    else if (key.rfind("per_category.", 0) == 0)
      r.per_category[key.substr(13)] = std::stod(value);
    else if (key.rfind("per_group.", 0) == 0)
      r.per_group[key.substr(10)] = std::stod(value);
    else if (key.rfind("extra.", 0) == 0)
      r.extra[key.substr(6)] = value;
    else if (key == "seed")
      r.seed = std::stoull(value);
    else if (key == "config_hash")
      r.config_hash = value;
    else if (key.rfind("confusion.", 0) == 0 && key.size() == 13 && key[11] == '.')
      r.confusion.counts[key[10] - 'a'][key[12] - 'a'] = std::stol(value);
    else
      throw std::runtime_error("report: unknown key: " + key);
  }
  return r;
}

}  // namespace mrbf
