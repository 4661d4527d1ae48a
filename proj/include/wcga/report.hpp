#pragma once

// CSV, JSON and SVG emission for experiment tables. All formatting is
// locale-free and fixed-precision, so output bytes depend only on the data.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcga/experiments.hpp"
#include "wcga/io.hpp"

namespace wcga::report {

using nlohmann::json;

inline std::string fixed(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

inline json fit_json(const RateTable& t) {
  if (!t.fit) return {{"error", t.fit_error}};
  return {{"slope", t.fit->slope}, {"intercept", t.fit->intercept}, {"residual", t.fit->residual}, {"points", t.fit->points}};
}

inline std::string rate_csv(const RateTable& t) {
  std::string out =
      "v,m,u,attempts,certified,lower_ratio,upper_ratio,points_seed,mean_error,max_error,sigma_oracle,min_excess,bv_max_error,members,ridge\n";
  for (const auto& r : t.rows) {
    out += std::to_string(r.v) + ',' + std::to_string(r.m) + ',' + std::to_string(r.u) + ',' + std::to_string(r.attempts) + ',' +
           (r.certified ? "1" : "0") + ',' + io::fmt(r.lower_ratio) + ',' + io::fmt(r.upper_ratio) + ',' +
           std::to_string(r.points_seed) + ',' + io::fmt(r.mean_error) + ',' + io::fmt(r.max_error) + ',' +
           io::fmt(r.sigma_oracle) + ',' + io::fmt(r.min_excess) + ',' + io::fmt(r.bv_max_error) + ',' +
           std::to_string(r.members) + ',' + (r.ridge ? "1" : "0") + '\n';
  }
  return out;
}

inline json rate_json(const RateTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"v", r.v},
                    {"m", r.m},
                    {"u", r.u},
                    {"attempts", r.attempts},
                    {"certified", r.certified},
                    {"lower_ratio", io::number(r.lower_ratio)},
                    {"upper_ratio", io::number(r.upper_ratio)},
                    {"points_seed", r.points_seed},
                    {"mean_error", io::number(r.mean_error)},
                    {"max_error", io::number(r.max_error)},
                    {"sigma_oracle", io::number(r.sigma_oracle)},
                    {"min_excess", io::number(r.min_excess)},
                    {"bv_max_error", io::number(r.bv_max_error)},
                    {"members", r.members},
                    {"ridge", r.ridge}});
  }
  return {{"label", t.label}, {"p", t.p}, {"rows", rows}, {"fit", fit_json(t)}};
}

/// Reads back the fields the plot needs.
inline RateTable rate_from_json(const json& j) {
  RateTable t;
  t.label = j.at("label").get<std::string>();
  t.p = j.at("p").get<double>();
  for (const auto& r : j.at("rows")) {
    RateRow row;
    row.v = r.at("v").get<std::size_t>();
    row.m = r.at("m").get<std::size_t>();
    row.max_error = r.at("max_error").is_null() ? kNaN : r.at("max_error").get<double>();
    row.mean_error = r.at("mean_error").is_null() ? kNaN : r.at("mean_error").get<double>();
    t.rows.push_back(row);
  }
  t.refit();
  return t;
}

inline std::string lebesgue_csv(const LebesgueTable& t) {
  std::string out =
      "trial,f0_norm,wcga_error,bv_error,sigma_inf,sigma_mixed,ratio_wcga_inf,ratio_wcga_mixed,ratio_bv_inf,ratio_bv_mixed,wcga_exact,bv_exact\n";
  for (const auto& r : t.rows) {
    out += std::to_string(r.trial) + ',' + io::fmt(r.f0_norm) + ',' + io::fmt(r.wcga_error) + ',' + io::fmt(r.bv_error) + ',' +
           io::fmt(r.sigma_inf) + ',' + io::fmt(r.sigma_mixed) + ',' + io::fmt(r.ratio_wcga_inf) + ',' +
           io::fmt(r.ratio_wcga_mixed) + ',' + io::fmt(r.ratio_bv_inf) + ',' + io::fmt(r.ratio_bv_mixed) + ',' +
           (r.wcga_exact ? "1" : "0") + ',' + (r.bv_exact ? "1" : "0") + '\n';
  }
  return out;
}

inline json quantiles_json(const Quantiles& q) {
  return {{"min", io::number(q.min)}, {"median", io::number(q.median)}, {"q90", io::number(q.q90)},
          {"max", io::number(q.max)}, {"count", q.count}};
}

inline json lebesgue_json(const LebesgueTable& t) {
  return {{"N", t.N},
          {"m", t.m},
          {"u", t.u},
          {"v", t.v},
          {"p", t.p},
          {"trials", t.rows.size()},
          {"all_finite", t.all_finite},
          {"bv_not_worse_fraction", io::number(t.bv_not_worse_fraction)},
          {"wcga_over_sigma_inf", quantiles_json(t.wcga_inf)},
          {"wcga_over_sigma_mixed", quantiles_json(t.wcga_mixed)},
          {"bv_over_sigma_inf", quantiles_json(t.bv_inf)},
          {"bv_over_sigma_mixed", quantiles_json(t.bv_mixed)}};
}

inline std::string oracle_csv(const OracleTable& t) {
  std::string out = "instance,v,wcga_error,sigma_error,bv_error,dominance,bv_equal\n";
  for (const auto& r : t.rows) {
    out += std::to_string(r.instance) + ',' + std::to_string(r.v) + ',' + io::fmt(r.wcga_error) + ',' + io::fmt(r.sigma_error) +
           ',' + io::fmt(r.bv_error) + ',' + (r.dominance ? "1" : "0") + ',' + (r.bv_equal ? "1" : "0") + '\n';
  }
  return out;
}

inline json oracle_json(const OracleTable& t) {
  return {{"rows", t.rows.size()}, {"dominance_failures", t.dominance_failures}, {"bv_mismatches", t.bv_mismatches}};
}

// ---------------------------------------------------------------------------
// SVG

struct PlotOptions {
  std::vector<double> reference_slopes{-1.5, -1.0};
  int width = 640;
  int height = 480;
};

/// Log-log plot of max error against v for each table, with the fitted
/// lines (solid) and reference slopes (dashed, anchored at the first point
/// of the first table).
inline std::string rate_svg(const std::vector<RateTable>& tables, const PlotOptions& opt = {}) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      if (!(r.max_error > 0.0) || !std::isfinite(r.max_error)) continue;
      x0 = std::min(x0, std::log10(static_cast<double>(r.v)));
      x1 = std::max(x1, std::log10(static_cast<double>(r.v)));
      y0 = std::min(y0, std::log10(r.max_error));
      y1 = std::max(y1, std::log10(r.max_error));
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0, x1 = 1.0, y0 = -1.0, y1 = 0.0;
  }
  if (x1 - x0 < 1e-9) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-9) y1 = y0 + 1.0;
  const double pad = 0.05;
  x0 -= pad * (x1 - x0), x1 += pad * (x1 - x0);
  y0 -= pad * (y1 - y0), y1 += pad * (y1 - y0);
  const double L = 70, R = opt.width - 20.0, T = 20, Bm = opt.height - 50.0;
  auto X = [&](double lx) { return L + (lx - x0) / (x1 - x0) * (R - L); };
  auto Y = [&](double ly) { return Bm - (ly - y0) / (y1 - y0) * (Bm - T); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) + "\" height=\"" +
                  std::to_string(opt.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(opt.width) + "\" height=\"" + std::to_string(opt.height) +
       "\" fill=\"white\"/>\n";
  s += "<rect x=\"" + fixed(L) + "\" y=\"" + fixed(T) + "\" width=\"" + fixed(R - L) + "\" height=\"" + fixed(Bm - T) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(x0)); e <= static_cast<int>(std::floor(x1)); ++e) {
    s += "<text x=\"" + fixed(X(e)) + "\" y=\"" + fixed(Bm + 16) + "\" text-anchor=\"middle\">1e" + std::to_string(e) + "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(y0)); e <= static_cast<int>(std::floor(y1)); ++e) {
    s += "<text x=\"" + fixed(L - 6) + "\" y=\"" + fixed(Y(e) + 4) + "\" text-anchor=\"end\">1e" + std::to_string(e) + "</text>\n";
  }
  s += "<text x=\"" + fixed((L + R) / 2) + "\" y=\"" + fixed(opt.height - 12.0) + "\" text-anchor=\"middle\">v</text>\n";
  s += "<text x=\"14\" y=\"" + fixed((T + Bm) / 2) + "\" transform=\"rotate(-90 14 " + fixed((T + Bm) / 2) +
       ")\" text-anchor=\"middle\">max error</text>\n";

  for (std::size_t k = 0; k < tables.size(); ++k) {
    const auto& t = tables[k];
    const std::string color = colors[k % 5];
    for (const auto& r : t.rows) {
      if (!(r.max_error > 0.0) || !std::isfinite(r.max_error)) continue;
      const double px = X(std::log10(static_cast<double>(r.v))), py = Y(std::log10(r.max_error));
      s += "<circle cx=\"" + fixed(px) + "\" cy=\"" + fixed(py) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    std::string legend = t.label;
    if (t.fit) {
      auto line_y = [&](double lx) { return (t.fit->intercept + t.fit->slope * lx * std::log(10.0)) / std::log(10.0); };
      s += "<line x1=\"" + fixed(X(x0)) + "\" y1=\"" + fixed(Y(line_y(x0))) + "\" x2=\"" + fixed(X(x1)) + "\" y2=\"" +
           fixed(Y(line_y(x1))) + "\" stroke=\"" + color + "\"/>\n";
      legend += " slope " + fixed(t.fit->slope);
    }
    s += "<text x=\"" + fixed(R - 8) + "\" y=\"" + fixed(T + 16 + 16.0 * static_cast<double>(k)) + "\" text-anchor=\"end\" fill=\"" +
         color + "\">" + legend + "</text>\n";
  }

  const RateRow* anchor = nullptr;
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      if (!anchor && r.max_error > 0.0 && std::isfinite(r.max_error)) anchor = &r;
    }
  }
  if (anchor) {
    const double ax = std::log10(static_cast<double>(anchor->v)), ay = std::log10(anchor->max_error);
    for (std::size_t k = 0; k < opt.reference_slopes.size(); ++k) {
      const double sl = opt.reference_slopes[k];
      s += "<line x1=\"" + fixed(X(ax)) + "\" y1=\"" + fixed(Y(ay)) + "\" x2=\"" + fixed(X(x1)) + "\" y2=\"" +
           fixed(Y(ay + sl * (x1 - ax))) + "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
      s += "<text x=\"" + fixed(L + 8) + "\" y=\"" + fixed(Bm - 8 - 16.0 * static_cast<double>(k)) + "\" fill=\"gray\">reference slope " +
           fixed(sl, 2) + "</text>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace wcga::report
