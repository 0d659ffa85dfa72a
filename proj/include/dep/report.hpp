#pragma once

// Experiment reports and their persistence. Metric tables are rendered with
// %.17g so a rerun with the same config reproduces byte-identical files;
// wall clock and timestamp live in meta.json only.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dep/config_file.hpp"

namespace dep {

struct CheckResult {
  std::string name;
  std::string kind;  // "exact", "statistical", or "exploratory"
  bool pass = true;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string experiment;
  KeyValues config;  // effective config echo
  std::uint64_t master_seed = 0;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, Table>> tables;

  Table& table(const std::string& name) {
    for (auto& [n, t] : tables)
      if (n == name) return t;
    tables.emplace_back(name, Table{});
    return tables.back().second;
  }

  CheckResult& add_check(std::string name, std::string kind, bool pass,
                         double measured, double threshold,
                         std::string detail = "") {
    checks.push_back({std::move(name), std::move(kind), pass, measured,
                      threshold, std::move(detail)});
    return checks.back();
  }

  // Exploratory entries never gate the run.
  bool all_pass() const {
    for (const auto& c : checks)
      if (c.kind != "exploratory" && !c.pass) return false;
    return true;
  }
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void must_write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace detail

inline std::string render_table_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += detail::fmt_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json report_json(const Report& rep) {
  nlohmann::ordered_json j;
  j["experiment"] = rep.experiment;
  j["version"] = "dephydro 0.1.0";
  j["master_seed"] = rep.master_seed;
  j["pass"] = rep.all_pass();
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : rep.checks) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["kind"] = c.kind;
    cj["pass"] = c.pass;
    cj["measured"] = c.measured;
    cj["threshold"] = c.threshold;
    cj["detail"] = c.detail;
    checks.push_back(std::move(cj));
  }
  auto& cfg = j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rep.config) cfg[k] = v;
  auto& tables = j["tables"] = nlohmann::ordered_json::object();
  for (const auto& [name, t] : rep.tables) {
    nlohmann::ordered_json tj;
    tj["columns"] = t.columns;
    tj["rows"] = t.rows;
    tables[name] = std::move(tj);
  }
  return j;
}

// Writes report.json, config_echo.cfg, one CSV per table, and meta.json
// (the only file that differs between reruns).
inline void write_report_files(const Report& rep, const std::string& dir,
                               double wall_clock_sec) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  detail::must_write(dir + "/report.json", report_json(rep).dump(2) + "\n");
  detail::must_write(dir + "/config_echo.cfg", render_config(rep.config));
  for (const auto& [name, t] : rep.tables)
    detail::must_write(dir + "/" + name + ".csv", render_table_csv(t));
  char stamp[64];
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  nlohmann::ordered_json meta;
  meta["timestamp"] = stamp;
  meta["wall_clock_sec"] = wall_clock_sec;
  detail::must_write(dir + "/meta.json", meta.dump(2) + "\n");
}

}  // namespace dep
