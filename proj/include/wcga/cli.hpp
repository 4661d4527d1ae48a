#pragma once

// Command-line front end. Every subcommand reads one JSON config, writes its
// outputs under --out together with manifest.json, and returns
// 0 (success), 1 (certification or assertion failure) or 2 (usage/config).

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wcga/config.hpp"
#include "wcga/discretization.hpp"
#include "wcga/experiments.hpp"
#include "wcga/function_classes.hpp"
#include "wcga/greedy.hpp"
#include "wcga/io.hpp"
#include "wcga/parallel.hpp"
#include "wcga/report.hpp"

namespace wcga::cli {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2 };

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline json versions() {
  return {{"wcga", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION},
          {"compiler", __VERSION__}};
}

/// "line L, column C" for a byte offset into text.
inline std::string text_position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

struct Invocation {
  std::string subcommand;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<unsigned> threads;
};

/// Outputs written by one run, and the summary that goes into the manifest.
class Context {
 public:
  Context(const Invocation& inv, json config, fs::path config_dir)
      : inv_(inv), config_(std::move(config)), config_dir_(std::move(config_dir)) {}

  [[nodiscard]] const json& config() const { return config_; }
  [[nodiscard]] std::uint64_t seed() const { return config_.at("seed").get<std::uint64_t>(); }
  [[nodiscard]] fs::path resolve(const std::string& p) const { return fs::path(p).is_absolute() ? fs::path(p) : config_dir_ / p; }

  void text(const std::string& name, const std::string& body) {
    io::write_text((fs::path(inv_.out_dir) / name).string(), body);
    outputs_.push_back(name);
  }
  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  json summary = json::object();
  [[nodiscard]] const std::vector<std::string>& outputs() const { return outputs_; }

 private:
  const Invocation& inv_;
  json config_;
  fs::path config_dir_;
  std::vector<std::string> outputs_;
};

// ---------------------------------------------------------------------------
// Shared config pieces

/// {"kind": "random", "m": 202} | {"kind": "grid", "per_axis": 16} |
/// {"kind": "file", "path": "points.csv"}; random points use the run seed.
inline PointSet read_points(ConfigReader rd, std::size_t d, std::uint64_t seed, const Context& ctx) {
  const auto kind = rd.get<std::string>("kind", "random");
  PointSet pts;
  if (kind == "random") {
    pts = draw_random_points(d, rd.require<std::size_t>("m"), seed);
  } else if (kind == "grid") {
    pts = PointSet::uniform_grid(d, rd.require<std::size_t>("per_axis"));
  } else if (kind == "file") {
    pts = io::points_from_csv(io::read_text(ctx.resolve(rd.require<std::string>("path")).string()));
    if (pts.dim() != d) throw ConfigError(rd.where("path") + ": point dimension differs from d");
  } else {
    throw ConfigError(rd.where("kind") + ": expected random, grid or file");
  }
  rd.finish();
  return pts;
}

struct SystemSpec {
  std::size_t d = 1;
  std::size_t level = 4;
  double p = 2.0;
};

inline SystemSpec read_system(ConfigReader& rd) {
  SystemSpec s;
  s.d = rd.get("d", s.d);
  s.level = rd.get("system_level", s.level);
  s.p = rd.get("p", s.p);
  static_cast<void>(LpExponent{s.p});
  return s;
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_discretize(Context& ctx) {
  ConfigReader rd(ctx.config(), "");
  const auto sys = read_system(rd);
  rd.require<std::uint64_t>("seed");
  const TrigSystem system(sys.d, sys.level);
  std::size_t m = 0;
  std::string warning;
  if (rd.has("m")) {
    m = rd.require<std::size_t>("m");
  } else {
    auto br = rd.child("budget");
    const auto u = br.require<std::size_t>("u");
    const double K = br.get("K", 1.0);
    SampleBudgetConstants k;
    k.C = br.get("C", k.C);
    k.epsilon = br.get("epsilon", k.epsilon);
    br.finish();
    const auto b = sample_budget(sys.p, u, system.size(), K, k);
    m = b.value;
    warning = b.warning;
  }
  std::optional<std::size_t> cert_u;
  UsdOptions uo;
  uo.seed = ctx.seed();
  if (rd.has("certify")) {
    auto cr = rd.child("certify");
    cert_u = cr.require<std::size_t>("u");
    uo.trials = cr.get("trials", uo.trials);
    uo.refine_steps = cr.get("refine_steps", uo.refine_steps);
    cr.finish();
  }
  rd.finish();
  if (m == 0) throw ParameterError("sample budget is 0: nothing to draw");
  const PointSet pts = draw_random_points(sys.d, m, ctx.seed());
  ctx.text("points.csv", io::points_to_csv(pts));
  json out = {{"m", m}, {"N", system.size()}, {"d", sys.d}, {"p", sys.p}, {"budget_warning", warning}};
  int code = kOk;
  if (cert_u) {
    const auto rep = verify_usd(system, pts, *cert_u, sys.p, uo);
    out["usd"] = io::to_json(rep, &system);
    if (!rep.pass) code = kFailed;
    ctx.summary["usd_pass"] = rep.pass;
  }
  ctx.json_file("discretize.json", out);
  ctx.summary["m"] = m;
  return code;
}

inline int cmd_verify_usd(Context& ctx) {
  ConfigReader rd(ctx.config(), "");
  const auto sys = read_system(rd);
  const auto u = rd.require<std::size_t>("u");
  UsdOptions uo;
  uo.seed = rd.require<std::uint64_t>("seed");
  uo.trials = rd.get("trials", uo.trials);
  uo.refine_steps = rd.get("refine_steps", uo.refine_steps);
  const TrigSystem system(sys.d, sys.level);
  const PointSet pts = read_points(rd.child("points"), sys.d, uo.seed, ctx);
  rd.finish();
  const auto rep = verify_usd(system, pts, u, sys.p, uo);
  ctx.json_file("usd.json", io::to_json(rep, &system));
  ctx.summary = {{"pass", rep.pass}, {"lower_ratio", io::number(rep.lower_ratio)}, {"upper_ratio", io::number(rep.upper_ratio)}};
  return rep.pass ? kOk : kFailed;
}

inline int cmd_rip_check(Context& ctx) {
  ConfigReader rd(ctx.config(), "");
  const auto sys = read_system(rd);
  const auto v = rd.require<std::size_t>("v");
  RipOptions ro;
  ro.seed = rd.require<std::uint64_t>("seed");
  ro.trials = rd.get("trials", ro.trials);
  ro.refine_steps = rd.get("refine_steps", ro.refine_steps);
  const auto norm_name = rd.get<std::string>("norm", "synthesis");
  const double max_delta = rd.get("max_delta", kNaN);  // optional threshold
  const TrigSystem system(sys.d, sys.level);
  const PointSet pts = read_points(rd.child("points"), sys.d, ro.seed, ctx);
  rd.finish();
  RipNorm norm;
  if (norm_name == "synthesis") {
    norm = SynthesisNorm{&system};
  } else if (norm_name == "euclidean") {
    norm = EuclideanNorm{};
  } else {
    throw ConfigError("norm: expected synthesis or euclidean");
  }
  const auto rep = rip_check(synthesis_sampling_matrix(system, pts, sys.p), norm, sys.p, v, ro);
  ctx.json_file("rip.json", io::to_json(rep, &system));
  ctx.summary = {{"delta_estimate", io::number(rep.delta_estimate)}};
  return !std::isnan(max_delta) && !(rep.delta_estimate <= max_delta) ? kFailed : kOk;
}

inline int cmd_incoherence(Context& ctx) {
  ConfigReader rd(ctx.config(), "");
  const auto sys = read_system(rd);
  const auto v = rd.require<std::size_t>("v");
  const auto S = rd.require<std::size_t>("S");
  const double r = rd.get("r", 1.0);
  EstimateOptions eo;
  eo.seed = rd.require<std::uint64_t>("seed");
  eo.trials = rd.get("trials", eo.trials);
  eo.refine_steps = rd.get("refine_steps", eo.refine_steps);
  const auto context = rd.get<std::string>("context", "continuous");
  const bool uncond = rd.get("unconditionality", false);
  const double max_V = rd.get("max_V", kNaN);
  const TrigSystem system(sys.d, sys.level);
  NormContext nc = ContinuousContext{};
  if (context == "discrete") {
    nc = DiscreteContext{read_points(rd.child("points"), sys.d, eo.seed, ctx)};
  } else if (context != "continuous") {
    throw ConfigError("context: expected continuous or discrete");
  }
  rd.finish();
  const auto est = incoherence_estimate(system, nc, sys.p, v, S, r, eo);
  json out = {{"incoherence", io::to_json(est, &system)}};
  ctx.summary["V_estimate"] = io::number(est.V_estimate);
  if (uncond) {
    const auto u = unconditionality_estimate(system, nc, sys.p, v, S, eo);
    out["unconditionality"] = io::to_json(u, &system);
    ctx.summary["U_estimate"] = io::number(u.U_estimate);
  }
  ctx.json_file("incoherence.json", out);
  return !std::isnan(max_V) && !(est.V_estimate <= max_V) ? kFailed : kOk;
}

inline int cmd_recover(Context& ctx) {
  ConfigReader rd(ctx.config(), "");
  const auto sys = read_system(rd);
  const auto seed = rd.require<std::uint64_t>("seed");
  const TrigSystem system(sys.d, sys.level);
  const auto algorithm = rd.get<std::string>("algorithm", "wcga");
  WcgaOptions wo;
  wo.t = rd.get("t", wo.t);
  wo.max_iter = rd.get("iterations", wo.max_iter);
  wo.projection.tol = rd.get("tol", wo.projection.tol);
  const auto v = rd.get<std::size_t>("v", 1);
  const auto measure_name = rd.get<std::string>("measure", "empirical");
  const PointSet pts = read_points(rd.child("points"), sys.d, seed, ctx);

  CoefficientVector f0;
  {
    auto fr = rd.child("f0");
    if (fr.has("coefficients")) {
      try {
        f0 = io::coefficients_from_json(fr.raw("coefficients"), &system);
      } catch (const std::exception& e) {
        throw ConfigError(fr.where("coefficients") + ": " + e.what());
      }
    } else if (fr.has("member")) {
      auto mr = fr.child("member");
      ClassSpec cs;
      cs.d = sys.d;
      cs.r = mr.get("r", cs.r);
      cs.beta = mr.get("beta", cs.beta);
      cs.B = mr.get("B", cs.B);
      const double density = mr.get("density", 1.0);
      const auto mode = mr.get<std::string>("mode", "extremal");
      mr.finish();
      if (mode != "extremal" && mode != "slack") throw ConfigError(mr.where("mode") + ": expected extremal or slack");
      f0 = sample_member(cs, system, density, seed, mode == "slack" ? MemberMode::slack : MemberMode::extremal);
    } else {
      throw ConfigError(fr.where("") + ": needs 'coefficients' or 'member'");
    }
    fr.finish();
  }
  rd.finish();
  check_indices(f0, system.size());

  const auto mu = std::make_shared<DiscreteMeasure>(DiscreteMeasure::empirical(pts));
  MeasurePtr measure = mu;
  if (measure_name == "mixed") {
    measure = std::make_shared<DiscreteMeasure>(DiscreteMeasure::mixture(*system_quadrature(system), *mu));
  } else if (measure_name != "empirical") {
    throw ConfigError("measure: expected empirical or mixed");
  }
  const SampledSystem ss = restrict_system(system, measure);
  const SampledFunction f = ss.synthesize(f0);
  CoefficientVector approx;
  int code = kOk;
  if (algorithm == "wcga") {
    GreedyTrace trace;
    try {
      trace = wcga_run(f, ss, sys.p, wo);
    } catch (const GreedyFailure& e) {
      trace = e.trace;
      code = kFailed;
      ctx.summary["failure"] = e.what();
    }
    ctx.json_file("trace.json", io::to_json(trace, &system));
    approx = trace.approximant();
  } else if (algorithm == "bv") {
    const auto best = bv_best_vterm_recovery(f, ss, v, sys.p, kDefaultEnumerationCap, wo.projection);
    approx = best.approximant;
  } else {
    throw ConfigError("algorithm: expected wcga or bv");
  }
  const double f0_norm = continuous_lp_norm(system, f0, sys.p);
  const double err = continuous_lp_norm(system, f0 - approx, sys.p);
  ctx.json_file("recover.json", {{"algorithm", algorithm},
                                 {"f0_norm", io::number(f0_norm)},
                                 {"continuous_error", io::number(err)},
                                 {"m", pts.size()},
                                 {"approximant", io::to_json(approx, &system)}});
  ctx.summary["continuous_error"] = io::number(err);
  ctx.summary["f0_norm"] = io::number(f0_norm);
  return code;
}

inline int cmd_rates(Context& ctx) {
  const auto cfg = experiment_config_from_json(ctx.config());
  const auto nl = recovery_pipeline(cfg);
  ctx.text("rates.csv", report::rate_csv(nl));
  ctx.json_file("rates.json", report::rate_json(nl));
  std::vector<RateTable> tables{nl};
  ctx.summary["wcga_fit"] = report::fit_json(nl);
  if (cfg.linear_baseline && cfg.p == 2.0) {
    const auto lin = linear_baseline(cfg, nl);
    ctx.text("linear.csv", report::rate_csv(lin));
    ctx.json_file("linear.json", report::rate_json(lin));
    ctx.summary["linear_fit"] = report::fit_json(lin);
    tables.push_back(lin);
  }
  report::PlotOptions po;
  po.reference_slopes = {0.5 - 1.0 / cfg.cls.beta - cfg.cls.r / static_cast<double>(cfg.cls.d),
                         -cfg.cls.r / static_cast<double>(cfg.cls.d)};
  ctx.text("rates.svg", report::rate_svg(tables, po));
  const bool all_certified = std::all_of(nl.rows.begin(), nl.rows.end(), [](const RateRow& r) { return r.certified; });
  ctx.summary["all_certified"] = all_certified;
  return all_certified ? kOk : kFailed;
}

inline int cmd_lebesgue(Context& ctx) {
  const auto cfg = lebesgue_config_from_json(ctx.config());
  const auto t = lebesgue_ensemble(cfg);
  ctx.text("lebesgue.csv", report::lebesgue_csv(t));
  ctx.json_file("lebesgue.json", report::lebesgue_json(t));
  ctx.summary = {{"all_finite", t.all_finite}, {"bv_not_worse_fraction", io::number(t.bv_not_worse_fraction)}};
  return t.all_finite ? kOk : kFailed;
}

inline int cmd_oracle_compare(Context& ctx) {
  const auto cfg = oracle_config_from_json(ctx.config());
  const auto t = oracle_compare(cfg);
  ctx.text("oracle.csv", report::oracle_csv(t));
  ctx.json_file("oracle.json", report::oracle_json(t));
  ctx.summary = report::oracle_json(t);
  return t.dominance_failures == 0 && t.bv_mismatches == 0 ? kOk : kFailed;
}

/// {"inputs": ["rates.json", ...], "reference_slopes": [-1.5, -1.0]}; input
/// paths are relative to the config file.
inline int cmd_plot(Context& ctx) {
  ConfigReader rd(ctx.config(), "");
  rd.get<std::uint64_t>("seed", 0);
  const auto inputs = rd.require<std::vector<std::string>>("inputs");
  report::PlotOptions po;
  po.reference_slopes = rd.get("reference_slopes", po.reference_slopes);
  rd.finish();
  if (inputs.empty()) throw ConfigError("inputs: at least one table is needed");
  std::vector<RateTable> tables;
  json fits = json::array();
  for (const auto& in : inputs) {
    const auto path = ctx.resolve(in).string();
    json j;
    try {
      j = json::parse(io::read_text(path));
      tables.push_back(report::rate_from_json(j));
    } catch (const json::exception& e) {
      throw ConfigError(in + ": " + e.what());
    }
    fits.push_back(report::fit_json(tables.back()));
  }
  ctx.text("plot.svg", report::rate_svg(tables, po));
  ctx.summary["fits"] = fits;
  return kOk;
}

inline const std::map<std::string, std::function<int(Context&)>>& commands() {
  static const std::map<std::string, std::function<int(Context&)>> table{
      {"discretize", cmd_discretize}, {"verify-usd", cmd_verify_usd}, {"rip-check", cmd_rip_check},
      {"incoherence", cmd_incoherence}, {"recover", cmd_recover},     {"rates", cmd_rates},
      {"lebesgue", cmd_lebesgue},     {"oracle-compare", cmd_oracle_compare}, {"plot", cmd_plot}};
  return table;
}

/// Loads the config, applies the seed override and dispatches.
inline int execute(const Invocation& inv, std::ostream& err) {
  std::string text;
  try {
    text = io::read_text(inv.config_path);
  } catch (const std::exception&) {
    err << "error: cannot read config file " << inv.config_path << "\n";
    return kUsage;
  }
  json config;
  try {
    config = json::parse(text);
  } catch (const json::parse_error& e) {
    err << "error: " << inv.config_path << ": malformed JSON at " << text_position(text, e.byte == 0 ? 0 : e.byte - 1) << ": "
        << e.what() << "\n";
    return kUsage;
  }
  if (!config.is_object()) {
    err << "error: " << inv.config_path << ": top level must be an object\n";
    return kUsage;
  }
  if (inv.seed) config["seed"] = *inv.seed;
  if (!config.contains("seed")) config["seed"] = std::uint64_t{1};
  if (!config["seed"].is_number_unsigned()) {
    err << "error: " << inv.config_path << ": seed: expected a non-negative integer\n";
    return kUsage;
  }
  if (inv.threads) set_thread_count(*inv.threads);

  std::error_code ec;
  fs::create_directories(inv.out_dir, ec);
  if (ec) {
    err << "error: cannot create output directory " << inv.out_dir << ": " << ec.message() << "\n";
    return kUsage;
  }
  Context ctx(inv, config, fs::absolute(inv.config_path).parent_path());
  int code = kOk;
  try {
    code = commands().at(inv.subcommand)(ctx);
  } catch (const ConfigError& e) {
    err << "error: " << inv.config_path << ": " << e.what() << "\n";
    return kUsage;
  } catch (const CapExceeded& e) {
    err << "error: refused: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    err << "error: " << inv.config_path << ": invalid parameters: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    err << "error: " << inv.config_path << ": " << e.what() << "\n";
    return kUsage;
  } catch (const IndexError& e) {
    err << "error: " << inv.config_path << ": " << e.what() << "\n";
    return kUsage;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << " (dual residual " << io::fmt(e.dual_residual) << ")\n";
    code = kFailed;
  } catch (const json::exception& e) {
    err << "error: " << inv.config_path << ": " << e.what() << "\n";
    return kUsage;
  }

  std::string name = fs::path(inv.config_path).filename().string();
  json manifest = {{"subcommand", inv.subcommand},
                   {"config", name},
                   {"config_hash", "fnv1a64:" + hex64(fnv1a(text))},
                   {"seed", config["seed"]},
                   {"exit_code", code},
                   {"versions", versions()},
                   {"outputs", ctx.outputs()},
                   {"summary", ctx.summary}};
  io::write_json((fs::path(inv.out_dir) / "manifest.json").string(), manifest);
  if (code == kFailed) err << inv.subcommand << ": check failed; see " << (fs::path(inv.out_dir) / "manifest.json").string() << "\n";
  return code;
}

/// Parses argv and runs; never throws.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak Chebyshev greedy sampling recovery: certificates, recovery and rate experiments", "wcga"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);
  Invocation inv;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::map<std::string, CLI::Option*> seed_opts, thread_opts;
  for (const auto& [name, fn] : commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", inv.config_path, "JSON config file")->required();
    seed_opts[name] = sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("-o,--out", inv.out_dir, "output directory")->capture_default_str();
    thread_opts[name] = sub->add_option("--threads", threads, "worker threads (default: $WCGA_THREADS or hardware)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run 'wcga --help' for usage\n";
    return kUsage;
  }
  inv.subcommand = app.get_subcommands().front()->get_name();
  if (seed_opts[inv.subcommand]->count() > 0) inv.seed = seed;
  if (thread_opts[inv.subcommand]->count() > 0) {
    if (threads == 0) {
      err << "error: --threads must be at least 1\n";
      return kUsage;
    }
    inv.threads = threads;
  }
  try {
    return execute(inv, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
}

}  // namespace wcga::cli
