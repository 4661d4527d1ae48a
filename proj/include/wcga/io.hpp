#pragma once

// JSON and CSV serialization for point sets, coefficient vectors, reports
// and greedy traces. Numbers are written in shortest round-trip form so
// repeated runs produce identical bytes.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcga/discretization.hpp"
#include "wcga/function_classes.hpp"
#include "wcga/greedy.hpp"

namespace wcga::io {

using nlohmann::json;

/// %.17g, which round-trips every double.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON number, or null when not finite.
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Point sets: one point per row, coordinates separated by commas.

inline std::string points_to_csv(const PointSet& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto x = pts.point(i);
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (a) out += ',';
      out += fmt(x[a]);
    }
    out += '\n';
  }
  return out;
}

inline PointSet points_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> coords;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(row, cell, ',')) {
      try {
        coords.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParameterError("point CSV line " + std::to_string(line_no) + ": not a number: " + cell);
      }
      ++count;
    }
    if (dim == 0) dim = count;
    if (count != dim) throw DimensionError("point CSV line " + std::to_string(line_no) + ": expected " + std::to_string(dim) + " coordinates");
  }
  return PointSet(dim, std::move(coords));
}

// ---------------------------------------------------------------------------
// Coefficients

inline json to_json(const CoefficientVector& a, const TrigSystem* system = nullptr) {
  json arr = json::array();
  for (const auto& [i, c] : a) {
    json e = {{"index", i}, {"re", c.real()}, {"im", c.imag()}};
    if (system) e["k"] = system->frequency(i);
    arr.push_back(std::move(e));
  }
  return arr;
}

inline CoefficientVector coefficients_from_json(const json& arr, const TrigSystem* system = nullptr) {
  CoefficientVector out;
  for (const auto& e : arr) {
    std::size_t index;
    if (e.contains("index")) {
      index = e.at("index").get<std::size_t>();
    } else if (system && e.contains("k")) {
      auto idx = system->index_of(e.at("k").get<Frequency>());
      if (!idx) throw IndexError("frequency not in the system");
      index = *idx;
    } else {
      throw ParameterError("coefficient entry needs 'index' or 'k'");
    }
    out.add(index, {e.at("re").get<double>(), e.at("im").get<double>()});
  }
  return out;
}

inline json member_to_json(const CoefficientVector& a, const ClassSpec& spec, const TrigSystem& system) {
  return {{"class", {{"r", spec.r}, {"beta", spec.beta}, {"d", spec.d}, {"B", spec.B}}},
          {"max_level", system.max_level()},
          {"coefficients", to_json(a, &system)}};
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const UsdReport& r, const TrigSystem* system = nullptr) {
  return {{"lower_ratio", number(r.lower_ratio)},
          {"upper_ratio", number(r.upper_ratio)},
          {"pass", r.pass},
          {"u", r.u},
          {"p", r.p},
          {"m", r.m},
          {"trials", r.trials},
          {"lower_witness", to_json(r.lower_witness, system)},
          {"upper_witness", to_json(r.upper_witness, system)}};
}

inline json to_json(const RipReport& r, const TrigSystem* system = nullptr) {
  return {{"delta_estimate", number(r.delta_estimate)},
          {"lower_ratio", number(r.lower_ratio)},
          {"upper_ratio", number(r.upper_ratio)},
          {"v", r.v},
          {"p", r.p},
          {"norm", r.norm},
          {"trials", r.trials},
          {"lower_witness", to_json(r.lower_witness, system)},
          {"upper_witness", to_json(r.upper_witness, system)}};
}

inline json to_json(const IncoherenceEstimate& e, const TrigSystem* system = nullptr) {
  return {{"V_estimate", number(e.V_estimate)}, {"r", e.r},         {"v", e.v},
          {"S", e.S},                           {"trials", e.trials}, {"witness_A", e.witness_inner},
          {"witness", to_json(e.witness, system)}};
}

inline json to_json(const UnconditionalityEstimate& e, const TrigSystem* system = nullptr) {
  return {{"U_estimate", number(e.U_estimate)}, {"v", e.v}, {"S", e.S}, {"trials", e.trials},
          {"witness_A", e.witness_inner},       {"witness", to_json(e.witness, system)}};
}

inline json to_json(const GreedyTrace& t, const TrigSystem* system = nullptr) {
  json steps = json::array();
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    steps.push_back({{"iteration", i + 1},
                     {"selected", s.selected},
                     {"reselected", s.reselected},
                     {"functional_value", {s.functional_value.real(), s.functional_value.imag()}},
                     {"functional_max", number(s.functional_max)},
                     {"residual_norm", number(s.residual_norm)},
                     {"coefficients", to_json(s.coefficients, system)}});
  }
  return {{"p", t.p}, {"t", t.t}, {"initial_norm", number(t.initial_norm)}, {"exact", t.exact}, {"steps", steps}};
}

}  // namespace wcga::io
