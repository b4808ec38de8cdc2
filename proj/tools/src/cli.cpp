#include "cfsv/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "cfsv/calibration.hpp"
#include "cfsv/drift_factor.hpp"
#include "cfsv/error.hpp"
#include "cfsv/fourier_pricer.hpp"
#include "cfsv/io.hpp"
#include "cfsv/mc_engine.hpp"

#ifndef CFSV_VERSION
#define CFSV_VERSION "unknown"
#endif

namespace cfsv::cli {

using json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

namespace {

struct Globals {
  std::uint64_t seed = 42;
  unsigned threads = 0;
  std::string out;
  std::string preset;
  std::string params_file;
  std::string curves_file;
};

struct Outcome {
  std::string artifact;  // CSV or JSON written to --out (or stdout)
  std::string summary;   // human-readable lines, always shown when non-empty
  json config = json::object();
  json inputs = json::object();
};

json params_json(const ModelParams& p) { return json::parse(io::params_to_json(p)); }

struct Inputs {
  ModelParams params;
  MarketCurves curves = MarketCurves::flat(1.0);
  std::string preset;
};

Inputs resolve_inputs(const Globals& g, std::string_view default_preset, Outcome& o) {
  Inputs in;
  in.preset = g.preset.empty() ? std::string(default_preset) : g.preset;
  if (!g.params_file.empty()) {
    in.params = io::load_params(g.params_file);
    o.inputs["params"] = g.params_file;
    in.preset = "none";
  } else if (in.preset == "baseline") {
    in.params = presets::baseline();
  } else if (in.preset == "drift") {
    in.params = presets::drift_study();
  } else {
    raise(ErrorCode::InvalidConfig, "unknown preset '" + in.preset + "' (expected baseline or drift)");
  }
  validated(in.params);
  if (!g.curves_file.empty()) {
    in.curves = io::load_curves(g.curves_file);
    o.inputs["curves"] = g.curves_file;
  }
  o.config["preset"] = in.preset;
  o.config["params"] = params_json(in.params);
  o.config["curves"] = json::parse(io::curves_to_json(in.curves));
  return in;
}

struct QuadOptions {
  QuadratureConfig q;
  void add(CLI::App* cmd) {
    cmd->add_option("--theta-max", q.theta_max, "Upper limit of the Fourier integral")->capture_default_str();
    cmd->add_option("--nodes", q.n_nodes, "Gauss-Legendre nodes per panel")->capture_default_str();
    cmd->add_option("--panel-width", q.panel_width, "Width of each quadrature panel")->capture_default_str();
    cmd->add_option("--tail-tol", q.tail_tolerance, "Tolerance on the last panel, relative to F")->capture_default_str();
    cmd->add_option("--ode-steps", q.ode_steps, "RK4 steps for the Riccati system (0: automatic)")->capture_default_str();
  }
  json to_json() const {
    return {{"theta_max", q.theta_max}, {"n_nodes", q.n_nodes}, {"panel_width", q.panel_width},
            {"tail_tolerance", q.tail_tolerance}, {"ode_steps", q.ode_steps}};
  }
};

std::string csv(const auto& rows) {
  std::ostringstream s;
  write_csv(s, std::span(rows));
  return s.str();
}

std::string fmt(double x, int precision = 10) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

// price ---------------------------------------------------------------------

struct PriceCmd {
  double t_e = 1.0;
  std::optional<double> T, K;
  bool put = false;
  QuadOptions quad;

  void add(CLI::App* cmd) {
    cmd->add_option("--te", t_e, "Option expiry (years)")->capture_default_str();
    cmd->add_option("--T", T, "Settlement of the underlying forward (default: te)");
    cmd->add_option("--K", K, "Strike (default: F(0,T))");
    cmd->add_flag("--put", put, "Price a put instead of a call");
    quad.add(cmd);
  }

  Outcome run(const Globals& g) const {
    Outcome o;
    const Inputs in = resolve_inputs(g, "baseline", o);
    const OptionSpec spec{t_e, T.value_or(t_e), K.value_or(in.curves.forward(T.value_or(t_e))),
                          put ? OptionKind::Put : OptionKind::Call};
    QuadratureDiagnostics diag;
    const double price = option_price(spec, in.curves, in.params, quad.q, &diag);
    const double F = in.curves.forward(spec.T), D = in.curves.discount(spec.T);
    std::optional<double> iv;
    std::string iv_note;
    try {
      iv = implied_vol(price, F, spec.strike, spec.t_e, D, spec.kind);
    } catch (const InputError& e) {
      iv_note = e.what();
    }
    o.config["t_e"] = spec.t_e;
    o.config["T"] = spec.T;
    o.config["K"] = spec.strike;
    o.config["kind"] = put ? "put" : "call";
    o.config["quadrature"] = quad.to_json();

    json r = {{"t_e", spec.t_e}, {"T", spec.T}, {"K", spec.strike}, {"kind", put ? "put" : "call"},
              {"forward", F}, {"discount", D}, {"price", price}};
    r["implied_vol"] = iv ? json(*iv) : json(nullptr);
    r["diagnostics"] = {{"panels", diag.panels}, {"nodes", diag.nodes}, {"ode_steps", diag.ode_steps},
                        {"tail_contribution", diag.tail_contribution}};
    o.artifact = r.dump(2) + "\n";

    std::ostringstream s;
    s << "price        " << fmt(price, 15) << "\n"
      << "implied_vol  " << (iv ? fmt(*iv, 12) : "n/a (" + iv_note + ")") << "\n"
      << "forward      " << fmt(F) << "\n"
      << "discount     " << fmt(D) << "\n"
      << "panels       " << diag.panels << "\n"
      << "nodes        " << diag.nodes << "\n"
      << "ode_steps    " << diag.ode_steps << "\n"
      << "tail         " << fmt(diag.tail_contribution, 3) << "\n";
    o.summary = s.str();
    return o;
  }
};

// term-structure / smile ------------------------------------------------------

struct TermStructureCmd {
  std::vector<double> expiries{0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
  QuadOptions quad;

  void add(CLI::App* cmd) {
    cmd->add_option("--expiries", expiries, "Comma-separated expiries (years)")->delimiter(',')->capture_default_str();
    quad.add(cmd);
  }

  Outcome run(const Globals& g) const {
    Outcome o;
    const Inputs in = resolve_inputs(g, "baseline", o);
    o.config["expiries"] = expiries;
    o.config["quadrature"] = quad.to_json();
    o.artifact = csv(atm_term_structure(expiries, in.curves, in.params, quad.q));
    return o;
  }
};

struct SmileCmd {
  double t_e = 1.0;
  std::optional<double> T;
  std::vector<double> moneyness;
  std::vector<double> strikes;
  QuadOptions quad;

  void add(CLI::App* cmd) {
    cmd->add_option("--te", t_e, "Option expiry (years)")->capture_default_str();
    cmd->add_option("--T", T, "Settlement (default: te)");
    cmd->add_option("--strikes", strikes, "Comma-separated absolute strikes")->delimiter(',');
    cmd->add_option("--moneyness", moneyness, "Comma-separated K/F(0,T) (default 0.5,0.6,...,2.0)")->delimiter(',');
    quad.add(cmd);
  }

  Outcome run(const Globals& g) const {
    Outcome o;
    const Inputs in = resolve_inputs(g, "baseline", o);
    const double settle = T.value_or(t_e);
    std::vector<double> ks = strikes;
    if (ks.empty()) {
      std::vector<double> m = moneyness;
      if (m.empty())
        for (int i = 0; i <= 15; ++i) m.push_back(0.5 + 0.1 * i);
      for (double x : m) ks.push_back(x * in.curves.forward(settle));
    }
    o.config["t_e"] = t_e;
    o.config["T"] = settle;
    o.config["strikes"] = ks;
    o.config["quadrature"] = quad.to_json();
    o.artifact = csv(smile_slice(ks, t_e, settle, in.curves, in.params, quad.q));
    return o;
  }
};

// mc-price --------------------------------------------------------------------

DriftMode parse_mode(const std::string& s) {
  if (s == "exact") return DriftMode::ExactPerT;
  if (s == "approx" || s == "approximate") return DriftMode::Approximate;
  raise(ErrorCode::InvalidConfig, "unknown drift mode '" + s + "' (expected exact or approx)");
}

struct McOptions {
  std::size_t paths = 100'000;
  std::size_t steps = 100;
  bool antithetic = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--paths", paths, "Number of Monte Carlo paths")->capture_default_str();
    cmd->add_option("--steps", steps, "Time steps to the horizon")->capture_default_str();
    cmd->add_flag("--antithetic", antithetic, "Pair each path with its antithetic");
  }
};

struct McPriceCmd {
  std::string payoff = "vanilla";
  double t_e = 1.0;
  std::optional<double> T, K;
  bool put = false;
  std::string mode = "exact";
  double fix_start = 0.0, fix_end = 1.0, period = 1.0 / 12.0;
  std::size_t fixings = 21;
  McOptions mc;

  void add(CLI::App* cmd) {
    cmd->add_option("--payoff", payoff, "vanilla | early | forward | asian")->capture_default_str();
    cmd->add_option("--te", t_e, "Expiry (years)")->capture_default_str();
    cmd->add_option("--T", T, "Settlement (default: te)");
    cmd->add_option("--K", K, "Strike (default: F(0,T), or the first fixing's forward for asian)");
    cmd->add_flag("--put", put, "Put instead of call");
    cmd->add_option("--mode", mode, "Forward drift: exact | approx")->capture_default_str();
    cmd->add_option("--fix-start", fix_start, "Asian: first fixing time")->capture_default_str();
    cmd->add_option("--fix-end", fix_end, "Asian: last fixing time")->capture_default_str();
    cmd->add_option("--fixings", fixings, "Asian: number of fixings")->capture_default_str();
    cmd->add_option("--period", period, "Asian: prompt contract spacing (years)")->capture_default_str();
    mc.add(cmd);
  }

  Outcome run(const Globals& g) const {
    Outcome o;
    const Inputs in = resolve_inputs(g, "baseline", o);
    const OptionKind kind = put ? OptionKind::Put : OptionKind::Call;
    const double settle = T.value_or(t_e);
    PayoffSpec spec;
    if (payoff == "vanilla") {
      spec = PayoffSpec::vanilla(K.value_or(in.curves.forward(settle)), settle, kind);
    } else if (payoff == "early") {
      spec = PayoffSpec::early_exercise(K.value_or(in.curves.forward(settle)), t_e, settle, kind);
    } else if (payoff == "forward") {
      spec = PayoffSpec::forward(t_e, settle);
    } else if (payoff == "asian") {
      auto fx = prompt_fixings(fix_start, fix_end, fixings, period);
      const double strike = K.value_or(in.curves.forward(fx.front().T));
      spec = PayoffSpec::asian_prompt(strike, std::move(fx), kind);
    } else {
      raise(ErrorCode::InvalidConfig, "unknown payoff '" + payoff + "'");
    }
    validate(spec);

    McConfig cfg;
    cfg.n_paths = mc.paths;
    cfg.n_steps = mc.steps;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.antithetic = mc.antithetic;
    cfg.drift_mode = parse_mode(mode);
    double horizon = 0.0;
    for (const auto& f : spec.observations()) {
      horizon = std::max(horizon, f.t);
      if (cfg.drift_mode == DriftMode::ExactPerT &&
          std::find(cfg.exact_settlements.begin(), cfg.exact_settlements.end(), f.T) == cfg.exact_settlements.end())
        cfg.exact_settlements.push_back(f.T);
    }
    if (!(horizon > 0.0)) raise(ErrorCode::InvalidConfig, "payoff must observe the curve after t = 0");
    cfg.horizon = horizon;
    const McEstimate est = price_payoff(spec, cfg, in.curves, in.params);

    json fixings_json = json::array();
    for (const auto& f : spec.observations()) fixings_json.push_back({f.t, f.T});
    o.config["payoff"] = payoff;
    o.config["kind"] = put ? "put" : "call";
    o.config["strike"] = spec.strike;
    o.config["observations"] = fixings_json;
    o.config["mc"] = {{"n_paths", cfg.n_paths}, {"n_steps", cfg.n_steps}, {"horizon", cfg.horizon},
                      {"seed", cfg.seed}, {"drift_mode", to_string(cfg.drift_mode)},
                      {"exact_settlements", cfg.exact_settlements}, {"antithetic", cfg.antithetic}};
    json r = {{"value", est.value}, {"std_error", est.std_error}, {"n_paths", est.n_paths}};
    o.artifact = r.dump(2) + "\n";
    o.summary = "value      " + fmt(est.value, 12) + "\nstd_error  " + fmt(est.std_error, 6) +
                "\nn_paths    " + std::to_string(est.n_paths) + "\n";
    return o;
  }
};

// drift-study -----------------------------------------------------------------

struct DriftStudyCmd {
  std::vector<double> alphas{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  DriftStudySpec spec;
  McOptions mc;

  void add(CLI::App* cmd) {
    cmd->add_option("--alphas", alphas, "Comma-separated vol-of-vol values")->delimiter(',')->capture_default_str();
    cmd->add_option("--te", spec.t_e, "Option expiry (years)")->capture_default_str();
    cmd->add_option("--T", spec.T, "Forward settlement (years)")->capture_default_str();
    cmd->add_option("--otm", spec.otm_moneyness, "OTM strike as a multiple of F(0,T)")->capture_default_str();
    mc.add(cmd);
  }

  Outcome run(const Globals& g) const {
    Outcome o;
    const Inputs in = resolve_inputs(g, "drift", o);
    McConfig cfg;
    cfg.n_paths = mc.paths;
    cfg.n_steps = mc.steps;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.antithetic = mc.antithetic;
    o.config["alphas"] = alphas;
    o.config["t_e"] = spec.t_e;
    o.config["T"] = spec.T;
    o.config["otm_moneyness"] = spec.otm_moneyness;
    o.config["mc"] = {{"n_paths", cfg.n_paths}, {"n_steps", cfg.n_steps}, {"seed", cfg.seed},
                      {"antithetic", cfg.antithetic}};
    o.artifact = csv(drift_error_study(alphas, cfg, in.curves, in.params, spec));
    return o;
  }
};

// k-table -----------------------------------------------------------------------

struct KTableCmd {
  std::vector<double> times{0.25, 0.5, 1.0, 2.0};
  std::vector<double> settlements{1.0, 2.0, 5.0};

  void add(CLI::App* cmd) {
    cmd->add_option("--t", times, "Comma-separated observation times")->delimiter(',')->capture_default_str();
    cmd->add_option("--T", settlements, "Comma-separated settlements")->delimiter(',')->capture_default_str();
  }

  Outcome run(const Globals& g) const {
    Outcome o;
    const Inputs in = resolve_inputs(g, "drift", o);
    std::vector<DriftFactorResult> rows;
    for (double T : settlements)
      for (double t : times)
        if (t <= T) rows.push_back(k_factor(t, T, in.params));
    o.config["t"] = times;
    o.config["T"] = settlements;
    o.config["closed_form_gate"] = closed_form_gate().passed;
    std::ostringstream s;
    write_k_table(s, rows);
    o.artifact = s.str();
    return o;
  }
};

// calibrate -------------------------------------------------------------------

struct CalibrateCmd {
  std::string quotes_file;
  std::string initial_file;
  FitOptions options;
  QuadOptions quad;

  void add(CLI::App* cmd) {
    cmd->add_option("--quotes", quotes_file, "Quotes JSON")->required();
    cmd->add_option("--initial", initial_file, "Initial parameters JSON (default: --params or preset)");
    cmd->add_option("--budget", options.budget, "Maximum objective evaluations")->capture_default_str();
    cmd->add_option("--penalty", options.penalty_weight, "Quadratic pull toward the initial point")
        ->capture_default_str();
    quad.add(cmd);
  }

  Outcome run(const Globals& g) const {
    Outcome o;
    Globals gi = g;
    if (!initial_file.empty()) gi.params_file = initial_file;
    const Inputs in = resolve_inputs(gi, "baseline", o);
    const auto quotes = io::load_quotes(quotes_file);
    o.inputs["quotes"] = quotes_file;
    FitOptions opt = options;
    opt.quadrature = quad.q;
    const auto result = fit(quotes, in.curves, in.params, ParamBounds::defaults(), opt);
    o.config["budget"] = opt.budget;
    o.config["penalty_weight"] = opt.penalty_weight;
    o.config["objective_target"] = opt.objective_target;
    o.config["f_tolerance"] = opt.f_tolerance;
    o.config["x_tolerance"] = opt.x_tolerance;
    o.config["initial_step"] = opt.initial_step;
    o.config["quadrature"] = quad.to_json();
    o.artifact = io::params_to_json(result.params) + "\n";
    o.summary = "objective  " + fmt(result.objective, 6) + "\nn_evals    " + std::to_string(result.n_evals) +
                "\nstatus     " + std::string(to_string(result.status)) + "\n";
    return o;
  }
};

void emit(const std::string& command, const std::vector<std::string>& args, const Globals& g, Outcome& o,
          std::ostream& out) {
  if (g.out.empty()) {
    out << (o.summary.empty() ? o.artifact : o.summary);
    return;
  }
  io::write_file(g.out, o.artifact);
  json manifest;
  manifest["tool"] = "cfsv";
  manifest["version"] = CFSV_VERSION;
  manifest["command"] = command;
  manifest["argv"] = args;
  manifest["inputs"] = o.inputs;
  manifest["config"] = o.config;
  manifest["seed"] = g.seed;
  manifest["threads"] = g.threads;
  manifest["outputs"] = json::array({{{"path", g.out}, {"sha256", sha256_hex(o.artifact)}}});
  io::write_file(g.out + ".manifest.json", manifest.dump(2) + "\n");
  out << o.summary;
}

int replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  json m;
  try {
    m = json::parse(io::read_file(manifest_path));
  } catch (const json::exception& e) {
    raise(ErrorCode::InvalidConfig, std::string("manifest: ") + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array() || !m.contains("outputs"))
    raise(ErrorCode::InvalidConfig, "manifest: missing argv or outputs");
  const auto argv = m["argv"].get<std::vector<std::string>>();
  if (!argv.empty() && argv.front() == "replay") raise(ErrorCode::InvalidConfig, "manifest: refusing nested replay");
  std::ostringstream sink;
  const int code = run(argv, sink, err);
  if (code != kExitOk) return code;
  bool ok = true;
  for (const auto& entry : m["outputs"]) {
    const auto path = entry.at("path").get<std::string>();
    const auto expected = entry.at("sha256").get<std::string>();
    const auto actual = sha256_hex(io::read_file(path));
    out << (actual == expected ? "match     " : "MISMATCH  ") << path << "\n";
    ok = ok && actual == expected;
  }
  if (!ok) {
    err << "error: replayed outputs differ from the manifest\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forward-curve stochastic volatility pricing tool", "cfsv"};
  app.set_version_flag("--version", CFSV_VERSION);
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Monte Carlo worker threads (0: all cores)")->capture_default_str();
  app.add_option("--out", g.out, "Write the result here and a manifest next to it");
  app.add_option("--preset", g.preset, "Parameter preset: baseline | drift");
  app.add_option("--params", g.params_file, "Model parameters JSON (overrides --preset)");
  app.add_option("--curves", g.curves_file, "Forward/discount curves JSON (default: flat F = 1, D = 1)");

  PriceCmd price;
  TermStructureCmd term;
  SmileCmd smile;
  McPriceCmd mc_price;
  DriftStudyCmd drift;
  KTableCmd ktable;
  CalibrateCmd calibrate;
  std::string manifest_path;

  auto* c_price = app.add_subcommand("price", "Fourier price of a vanilla or early-exercise option");
  price.add(c_price);
  auto* c_term = app.add_subcommand("term-structure", "ATM implied volatility by expiry (CSV)");
  term.add(c_term);
  auto* c_smile = app.add_subcommand("smile", "Implied volatility by strike (CSV)");
  smile.add(c_smile);
  auto* c_mc = app.add_subcommand("mc-price", "Monte Carlo price with standard error");
  mc_price.add(c_mc);
  auto* c_drift = app.add_subcommand("drift-study", "Exact vs approximate drift comparison (CSV)");
  drift.add(c_drift);
  auto* c_k = app.add_subcommand("k-table", "Drift factor k^2(t,T) table (CSV)");
  ktable.add(c_k);
  auto* c_cal = app.add_subcommand("calibrate", "Fit parameters to implied-vol quotes");
  calibrate.add(c_cal);
  auto* c_replay = app.add_subcommand("replay", "Re-run a manifest and verify its output checksums");
  c_replay->add_option("--manifest", manifest_path, "Manifest JSON")->required();

  // Options may appear before or after the subcommand name.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    Outcome o;
    std::string command;
    if (c_price->parsed()) command = "price", o = price.run(g);
    else if (c_term->parsed()) command = "term-structure", o = term.run(g);
    else if (c_smile->parsed()) command = "smile", o = smile.run(g);
    else if (c_mc->parsed()) command = "mc-price", o = mc_price.run(g);
    else if (c_drift->parsed()) command = "drift-study", o = drift.run(g);
    else if (c_k->parsed()) command = "k-table", o = ktable.run(g);
    else if (c_cal->parsed()) command = "calibrate", o = calibrate.run(g);
    else if (c_replay->parsed()) return replay(manifest_path, out, err);
    emit(command, args, g, o, out);
    return kExitOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace cfsv::cli
