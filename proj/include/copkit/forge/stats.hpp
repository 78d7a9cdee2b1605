#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/core/corpus.hpp"
#include "copkit/forge/instance.hpp"

namespace copkit {

/// One column of the dataset statistics table.
struct StatsColumn {
  std::string name;
  std::size_t total = 0;
  double mean_length = 0.0;
  double std_length = 0.0;  // population
  std::size_t min_length = 0;
  std::size_t max_length = 0;
  std::map<std::string, std::size_t> domain_counts;
};

struct StatsTable {
  std::vector<StatsColumn> columns;
};

struct LengthRecord {
  std::size_t length;
  std::string domain;
};

inline StatsColumn summarize(std::string name, const std::vector<LengthRecord>& records) {
  StatsColumn c;
  c.name = std::move(name);
  c.total = records.size();
  if (records.empty()) return c;
  double sum = 0.0;
  c.min_length = records.front().length;
  c.max_length = records.front().length;
  for (const auto& r : records) {
    sum += static_cast<double>(r.length);
    c.min_length = std::min(c.min_length, r.length);
    c.max_length = std::max(c.max_length, r.length);
    ++c.domain_counts[r.domain];
  }
  c.mean_length = sum / static_cast<double>(records.size());
  double sq = 0.0;
  for (const auto& r : records) sq += (static_cast<double>(r.length) - c.mean_length) * (static_cast<double>(r.length) - c.mean_length);
  c.std_length = std::sqrt(sq / static_cast<double>(records.size()));
  return c;
}

inline std::vector<LengthRecord> length_records(const std::vector<Instance>& instances) {
  std::vector<LengthRecord> out;
  for (const auto& in : instances) out.push_back({in.step_length(), in.domain});
  return out;
}

/// Per-split columns plus a "total" column over all splits.
inline StatsTable corpus_stats(const std::vector<std::pair<std::string, std::vector<Instance>>>& splits) {
  StatsTable table;
  std::vector<LengthRecord> all;
  for (const auto& [name, instances] : splits) {
    auto records = length_records(instances);
    all.insert(all.end(), records.begin(), records.end());
    table.columns.push_back(summarize(name, records));
  }
  if (splits.size() > 1) table.columns.push_back(summarize("total", all));
  return table;
}

inline StatsColumn procedure_stats(const Corpus& corpus) {
  std::vector<LengthRecord> records;
  for (const auto& p : corpus.procedures()) records.push_back({p.steps.size(), p.domain});
  return summarize("corpus", records);
}

inline nlohmann::json to_json(const StatsTable& t) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : t.columns) {
    j.push_back({{"split", c.name},
                 {"total_samples", c.total},
                 {"mean_step_length", c.mean_length},
                 {"step_length_std", c.std_length},
                 {"min_step_length", c.min_length},
                 {"max_step_length", c.max_length},
                 {"domains", c.domain_counts}});
  }
  return j;
}

/// Aligned-column text rendering, one column per split.
inline std::string render_text(const StatsTable& t) {
  std::vector<std::string> domains;
  for (const auto& c : t.columns) {
    for (const auto& [d, n] : c.domain_counts) {
      if (std::find(domains.begin(), domains.end(), d) == domains.end()) domains.push_back(d);
    }
  }
  std::sort(domains.begin(), domains.end());
  auto fmt = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
  };
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  auto add_row = [&](std::string label, auto getter) {
    std::vector<std::string> cells;
    for (const auto& c : t.columns) cells.push_back(getter(c));
    rows.emplace_back(std::move(label), std::move(cells));
  };
  add_row("Total Samples", [](const StatsColumn& c) { return std::to_string(c.total); });
  add_row("Mean Step Length", [&](const StatsColumn& c) { return fmt(c.mean_length); });
  add_row("Step Length Std", [&](const StatsColumn& c) { return fmt(c.std_length); });
  add_row("Shortest Sample", [](const StatsColumn& c) { return std::to_string(c.min_length); });
  add_row("Longest Sample", [](const StatsColumn& c) { return std::to_string(c.max_length); });
  for (const auto& d : domains) {
    add_row("domain:" + d, [&](const StatsColumn& c) {
      auto it = c.domain_counts.find(d);
      return std::to_string(it == c.domain_counts.end() ? 0 : it->second);
    });
  }

  std::size_t label_width = 6;
  for (const auto& r : rows) label_width = std::max(label_width, r.first.size());
  std::vector<std::size_t> widths;
  for (const auto& c : t.columns) widths.push_back(c.name.size());
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.second.size(); ++i) widths[i] = std::max(widths[i], r.second[i].size());
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(label_width)) << "Metric";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    os << "  " << std::right << std::setw(static_cast<int>(widths[i])) << t.columns[i].name;
  }
  os << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(label_width)) << r.first;
    for (std::size_t i = 0; i < r.second.size(); ++i) {
      os << "  " << std::right << std::setw(static_cast<int>(widths[i])) << r.second[i];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace copkit
