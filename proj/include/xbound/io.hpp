#pragma once

// Deterministic file output. Every file is written to a temporary and renamed
// into place.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xbound/analysis.hpp"
#include "xbound/evolve.hpp"
#include "xbound/model.hpp"

namespace xbound::io {

using json = nlohmann::json;

inline constexpr const char* tool_version = "1.0.0";

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(const std::vector<double>& row) {
    if (row.size() != columns_.size()) throw ConfigError("CSV row width does not match the header");
    rows_.push_back(row);
  }

  std::string str() const {
    std::string s;
    for (std::size_t c = 0; c < columns_.size(); ++c) s += (c ? "," : "") + columns_[c];
    s += '\n';
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c) s += ',';
        s += format_number(r[c]);
      }
      s += '\n';
    }
    return s;
  }

  void write(const std::filesystem::path& path) const { write_atomic(path, str()); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

inline void write_json(const std::filesystem::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

// Reads a numeric CSV with a header line.
inline std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + " is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("non-numeric CSV cell '" + cell + "' in " + path.string());
      }
    }
    if (row.size() != header.size()) throw ConfigError("ragged CSV row in " + path.string());
    rows.push_back(std::move(row));
  }
  return {header, rows};
}

// Half-line state from a two-column CSV (x, phi) on a uniform grid starting at 0.
inline WaveFunction read_state(const std::filesystem::path& path, Dimension dim) {
  const auto [header, rows] = read_csv(path);
  if (header.size() < 2 || rows.size() < 3) throw ConfigError(path.string() + " is not a state file");
  WaveFunction wf;
  wf.dimension = dim;
  wf.convention = AmplitudeConvention::explicit_amplitude;
  const double L = rows.back()[0];
  wf.grid = Grid::half_line(L, rows.size());
  if (std::abs(rows.front()[0]) > 1e-12 * L) throw ConfigError("state grid must start at 0");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::abs(rows[i][0] - wf.grid.at(i)) > 1e-9 * L) throw ConfigError("state grid must be uniform");
    wf.values.push_back(rows[i][1]);
  }
  wf.validate();
  return wf;
}

inline std::vector<double> parse_ladder(const std::string& text) {
  std::vector<std::string> parts;
  {
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
  }
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + s + "' in ladder '" + text + "'");
    }
  };
  if (parts.size() == 4) {
    const double a = num(parts[0]), b = num(parts[1]);
    const int n = static_cast<int>(num(parts[3]));
    if (n < 2) throw ConfigError("ladder needs at least 2 points");
    std::vector<double> out;
    if (parts[2] == "log") {
      if (a == 0.0 || b == 0.0 || (a < 0) != (b < 0)) throw ConfigError("log ladder endpoints must share a sign");
      const double sgn = a < 0 ? -1.0 : 1.0;
      const double la = std::log(std::abs(a)), lb = std::log(std::abs(b));
      for (int k = 0; k < n; ++k) out.push_back(sgn * std::exp(la + (lb - la) * k / (n - 1)));
    } else if (parts[2] == "lin") {
      for (int k = 0; k < n; ++k) out.push_back(a + (b - a) * k / (n - 1));
    } else {
      throw ConfigError("ladder spacing must be 'log' or 'lin'");
    }
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ',')) out.push_back(num(p));
  if (out.empty()) throw ConfigError("empty ladder");
  return out;
}

// ---------------------------------------------------------------------------
// JSON views of the library types.

inline json to_json(const ProblemSpec& s) {
  json j{{"dimension", to_string(s.dimension)}, {"gamma", s.gamma}, {"g", s.g}, {"sigma", s.sigma},
         {"energy", s.energy}};
  j["parity"] = s.parity ? json(to_string(*s.parity)) : json(nullptr);
  j["vorticity"] = s.vorticity ? json(*s.vorticity) : json(nullptr);
  return j;
}

inline json to_json(const Grid& g) {
  return {{"start", g.start}, {"extent", g.extent}, {"samples", g.samples}, {"spacing", g.spacing()}};
}

inline json to_json(const StructureReport& r) {
  json j{{"zeros", r.zeros}, {"inflexions", r.inflexions}, {"extra_inflexions", r.extra_inflexions},
         {"cell", r.cell}, {"all_matched", r.all_matched()}};
  std::vector<bool> m(r.matched.begin(), r.matched.end());
  j["matched"] = m;
  j["x_max"] = r.x_max ? json(*r.x_max) : json(nullptr);
  return j;
}

inline json to_json(const TailFit& f) {
  json j{{"phi0", f.phi0}, {"chi0", f.chi0}, {"chi0_over_pi", f.chi0 / std::numbers::pi}, {"residual", f.residual},
         {"window", {f.inner, f.outer}}, {"model", to_string(f.model)}, {"order", f.order}, {"points", f.points}};
  j["core_scale"] = f.core_scale ? json(*f.core_scale) : json(nullptr);
  return j;
}

inline json to_json(const NormCurve& n) {
  return {{"truncations", n.truncations}, {"norms", n.norms}, {"classification", to_string(n.classification)},
          {"log_slope", n.log_slope}, {"log_intercept", n.log_intercept}, {"log_slope_t", n.log_slope_t},
          {"limit", n.limit}, {"saturation_coefficient", n.saturation_coefficient}, {"rss_log", n.rss_log},
          {"rss_saturating", n.rss_saturating}};
}

inline json to_json(const ScanResult& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back({{"energy", p.energy}, {"x_max", p.x_max}, {"extent", p.extent}});
  return {{"slope", s.slope}, {"intercept", s.intercept}, {"points", pts}, {"residuals", s.residuals}};
}

inline json to_json(const StabilityVerdict& v) {
  json j{{"verdict", to_string(v.verdict)}, {"max_profile_deviation", v.max_profile_deviation},
         {"core_radius", v.core_radius}, {"stable_threshold", v.stable_threshold}};
  j["blowup_time"] = v.blowup_time ? json(*v.blowup_time) : json(nullptr);
  j["blowup_reason"] = v.blowup_reason ? json(*v.blowup_reason) : json(nullptr);
  return j;
}

inline json to_json(const LadderEntry& e) {
  json j{{"amplitude", e.amplitude}, {"norm", e.norm}, {"verdict", to_string(e.verdict)},
         {"max_profile_deviation", e.max_profile_deviation}};
  j["blowup_time"] = e.blowup_time ? json(*e.blowup_time) : json(nullptr);
  return j;
}

inline Table trajectory_table(const Trajectory& t) {
  Table tab({"t", "core_norm", "total_norm", "peak_amplitude"});
  for (std::size_t i = 0; i < t.times.size(); ++i)
    tab.add({t.times[i], t.core_norm[i], t.total_norm[i], t.peak_amplitude[i]});
  return tab;
}

struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> configuration;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_time = 0.0;

  json to_json() const {
    return {{"tool_version", tool_version}, {"subcommand", subcommand}, {"configuration", configuration},
            {"inputs", inputs}, {"outputs", outputs}, {"wall_time_s", wall_time}};
  }
};

}  // namespace xbound::io
