#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bergman/bekolle.hpp"
#include "bergman/kernel_ops.hpp"
#include "bergman/sarason.hpp"
#include "bergman/stegenga.hpp"
#include "bergman/two_weight.hpp"

using namespace bergman;

namespace {

struct RunConfig {
  std::string subcommand;
  int depth = -1;
  int mesh_depth = -1;
  int quad_order = 6;
  double tol = 1e-6;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
  std::vector<double> alphas{0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9};
  int nmax = 4;
  int trials = 100;
  std::string beta = "0";
  std::uint64_t samples = 100000;
  std::vector<double> f_coeffs{1.0};
  std::vector<double> g_coeffs{1.0};
  int trunc = 32;
};

// Exit code 2: a mathematical assertion failed; the artifact is still written.
struct Outcome {
  std::string text;
  bool ok = true;
};

int depth_or(const RunConfig& c, int fallback) { return c.depth >= 0 ? c.depth : fallback; }
int mesh_or(const RunConfig& c, int fallback) { return c.mesh_depth >= 0 ? c.mesh_depth : fallback; }

Beta parse_beta(const std::string& s) {
  if (s == "0") return Beta::Zero;
  if (s == "1/3") return Beta::Third;
  throw ArgumentError("--beta must be 0 or 1/3");
}

std::string csv_text(const CsvTable& t, const RunConfig& c) {
  std::ostringstream os;
  os << "# bergmanlab " << c.subcommand << " seed=" << c.seed << "\n";
  t.write(os);
  return os.str();
}

std::string json_text(Json j, const RunConfig& c) {
  Json out{{"subcommand", c.subcommand}, {"seed", c.seed}};
  out["report"] = std::move(j);
  return dump_json(out);
}

Outcome emit(const RunConfig& c, const Json& j, const CsvTable* csv, bool ok) {
  if (c.format == "csv") {
    if (!csv) throw ArgumentError("--format csv is not available for " + c.subcommand);
    return {csv_text(*csv, c), ok};
  }
  return {json_text(j, c), ok};
}

Outcome run_grids(const RunConfig& c) {
  const auto grid = build_grid(parse_beta(c.beta), depth_or(c, 2));
  Json arr = Json::array();
  CsvTable t;
  t.header = {"beta", "level", "index", "start", "length"};
  for (const auto& i : grid) {
    arr.push_back(Json{{"beta", beta_name(i.beta)},
                       {"level", i.level},
                       {"index", i.index},
                       {"start", i.start()},
                       {"length", i.length()}});
    t.add_row({beta_name(i.beta), std::to_string(i.level), std::to_string(i.index),
               format_double(i.start()), format_double(i.length())});
  }
  return emit(c, arr, &t, true);
}

Outcome run_kernel_compare(const RunConfig& c) {
  const auto r = comparability_report(c.samples, depth_or(c, 12), c.seed);
  const bool ok = r.consistent_violations[0] == 0 && r.consistent_violations[1] == 0 &&
                  std::isfinite(r.sup_ratio_upper);
  return emit(c, to_json(r), nullptr, ok);
}

Outcome run_kernel_identities(const RunConfig& c) {
  const auto s = kernel_identity_sweep(c.samples, c.seed);
  return emit(c, to_json(s), nullptr, s.max_residual <= 1e-10);
}

Outcome run_two_weight(const RunConfig& c) {
  const auto trials = verify_battery(c.trials, depth_or(c, 3), c.seed);
  const bool ok = std::all_of(trials.begin(), trials.end(), [](const TrialResult& t) { return t.necessity; });
  Json arr = Json::array();
  for (const auto& t : trials) arr.push_back(to_json(t));
  const CsvTable csv = trials_csv(trials);
  return emit(c, arr, &csv, ok);
}

Outcome run_bekolle(const RunConfig& c) {
  const int mesh = mesh_or(c, 6);
  const int depth = depth_or(c, mesh);
  const auto m = build_mesh(mesh);
  Json arr = Json::array();
  CsvTable t;
  t.header = {"alpha", "B2", "Binf_w", "Binf_dual"};
  bool ok = true;
  for (double a : c.alphas) {
    const auto w = radial_power_weight(m, a);
    const auto wc = weight_constants(w, 2.0, depth);
    ok = ok && wc.binf_w <= wc.bp * (1.0 + 1e-12) && wc.binf_winv <= wc.bp * (1.0 + 1e-12);
    Json j = to_json(wc);
    j["alpha"] = a;
    arr.push_back(j);
    t.add_row({format_double(a), format_double(wc.bp), format_double(wc.binf_w), format_double(wc.binf_winv)});
  }
  return emit(c, arr, &t, ok);
}

Outcome run_sharp_sweep(const RunConfig& c) {
  const auto rows = sharp_sweep(c.alphas, depth_or(c, 8));
  double lo = INFINITY, hi = 0.0;
  Json arr = Json::array();
  for (const auto& r : rows) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    arr.push_back(Json{{"alpha", r.alpha}, {"depth", r.depth}, {"norm", r.norm}, {"B2", r.b2},
                       {"Binf_w", r.binf_w}, {"Binf_winv", r.binf_winv}, {"ratio", r.ratio}});
  }
  const CsvTable csv = sharp_csv(rows);
  return emit(c, Json{{"rows", arr}, {"spread", hi / lo}}, &csv, hi / lo <= 50.0);
}

AnalyticSymbol poly(const std::vector<double>& coeffs, const char* name) {
  std::vector<Complex> c(coeffs.begin(), coeffs.end());
  return AnalyticSymbol::from_coefficients(std::move(c), name);
}

Outcome run_sarason_pair(const RunConfig& c) {
  PairOptions o;
  o.sample.mesh_depth = mesh_or(c, 6);
  o.sample.order = c.quad_order;
  o.depth = depth_or(c, o.sample.mesh_depth);
  o.toeplitz_m = c.trunc;
  o.tol = c.tol;
  const auto f = poly(c.f_coeffs, "f");
  const auto g = poly(c.g_coeffs, "g");
  Json j = sarason_pair(f, g, o);
  return emit(c, j, nullptr, j["delta_certified"].get<bool>());
}

Outcome run_stegenga_set(const RunConfig& c) {
  const int n = c.nmax;
  const CantorSet set = cantor_set(n);
  Json pts = Json::array();
  for (const auto& p : set.points) pts.push_back(p.str());
  const Rational tau = tau_value(n);
  const KstepResult k = kstep_check(std::min(n, 8));
  const ConditionK ck = condition_K_check(n, static_cast<std::size_t>(c.trials), c.seed);
  Json j{{"n", n},
         {"points", pts},
         {"tau", tau.str()},
         {"tau_double", tau.convert_to<double>()},
         {"tau_bound", tau_bound().str()},
         {"kstep_min", k.min_ratio.str()},
         {"kstep_min_double", k.min_ratio.convert_to<double>()},
         {"kstep_bound", k.bound.str()},
         {"kstep_holds", k.holds},
         {"condition_K_min", ck.min_ratio},
         {"condition_K_trials", ck.trials},
         {"condition_K_at_least_quarter", ck.holds}};
  return emit(c, j, nullptr, tau <= tau_bound() && k.holds);
}

Outcome run_counterexample(const RunConfig& c) {
  PipelineOptions o;
  o.n_max = c.nmax;
  o.sample.mesh_depth = mesh_or(c, 6);
  o.sample.order = c.quad_order;
  o.depth = depth_or(c, o.sample.mesh_depth);
  o.tol = c.tol;
  const auto r = counterexample_pipeline(o);
  const CsvTable csv = pipeline_csv(r);
  return emit(c, pipeline_json(r, o), &csv, r.g_check.min_ratio > 0.0);
}

Outcome dispatch(const RunConfig& c) {
  if (c.subcommand == "grids") return run_grids(c);
  if (c.subcommand == "kernel-compare") return run_kernel_compare(c);
  if (c.subcommand == "kernel-identities") return run_kernel_identities(c);
  if (c.subcommand == "two-weight-verify") return run_two_weight(c);
  if (c.subcommand == "bekolle") return run_bekolle(c);
  if (c.subcommand == "sharp-sweep") return run_sharp_sweep(c);
  if (c.subcommand == "sarason-pair") return run_sarason_pair(c);
  if (c.subcommand == "stegenga-set") return run_stegenga_set(c);
  return run_counterexample(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic Bergman projection workbench"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--depth", cfg.depth, "Interval depth");
    sub->add_option("--mesh-depth", cfg.mesh_depth, "Cell mesh depth");
    sub->add_option("--quad-order", cfg.quad_order, "Gauss-Legendre order per direction")
        ->check(CLI::IsMember({2, 4, 6, 8, 10, 12, 16, 20}));
    sub->add_option("--tol", cfg.tol, "Quadrature tolerance");
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--out", cfg.out, "Output file (default: stdout)");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };

  const std::vector<std::pair<std::string, std::string>> subs{
      {"grids", "List the intervals of one dyadic grid"},
      {"kernel-compare", "Compare the Bergman kernel with its dyadic models"},
      {"kernel-identities", "Check the kernel identities on random pairs"},
      {"two-weight-verify", "Random two-weight instances: testing constants vs. exact norms"},
      {"bekolle", "B_2 and B_infinity constants of radial power weights"},
      {"sharp-sweep", "Sharp mixed estimate over radial power weights"},
      {"sarason-pair", "b_fg, Toeplitz norm, test conditions, gamma and delta for polynomial symbols"},
      {"stegenga-set", "Exact Cantor set metrics"},
      {"counterexample", "The Stegenga/outer-symbol pipeline"}};
  for (const auto& [name, help] : subs) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    sub->callback([&cfg, name = name] { cfg.subcommand = name; });
    if (name == "grids") sub->add_option("--beta", cfg.beta, "0 or 1/3");
    if (name == "kernel-compare" || name == "kernel-identities")
      sub->add_option("--samples", cfg.samples, "Random pairs");
    if (name == "two-weight-verify" || name == "stegenga-set")
      sub->add_option("--trials", cfg.trials, "Trials or random intervals");
    if (name == "bekolle" || name == "sharp-sweep")
      sub->add_option("--alphas", cfg.alphas, "Exponents in (-1, 1)")->delimiter(',');
    if (name == "stegenga-set" || name == "counterexample") sub->add_option("--nmax", cfg.nmax, "Generation");
    if (name == "sarason-pair") {
      sub->add_option("--f", cfg.f_coeffs, "Taylor coefficients of f")->delimiter(',');
      sub->add_option("--g", cfg.g_coeffs, "Taylor coefficients of g")->delimiter(',');
      sub->add_option("--trunc", cfg.trunc, "Toeplitz truncation M");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const Outcome res = dispatch(cfg);
    if (cfg.out.empty()) {
      std::cout << res.text;
    } else {
      std::ofstream os(cfg.out, std::ios::binary);
      if (!os) throw std::runtime_error("cannot open " + cfg.out);
      os << res.text;
      if (!os) throw std::runtime_error("write failed: " + cfg.out);
    }
    return res.ok ? 0 : 2;
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
