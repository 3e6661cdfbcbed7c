#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "optdesign/csv.hpp"
#include "optdesign/design.hpp"
#include "optdesign/error.hpp"
#include "optdesign/glm_fit.hpp"
#include "optdesign/link.hpp"
#include "optdesign/robustness.hpp"
#include "optdesign/simulation.hpp"
#include "optdesign/solver.hpp"

namespace optdesign::cli {

namespace {

using nlohmann::json;

constexpr int kJsonDigits = 12;
constexpr const char* kOutDirEnv = "OPTDESIGN_OUT_DIR";

// JSON numbers carry 12 significant digits; non-finite values become null.
json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(csv::format_significant(x, kJsonDigits));
}

template <typename Range>
json num_array(const Range& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(num(x));
  return a;
}

struct SolveArgs {
  std::string w;
  std::string beta;
  std::string link = "logit";
  int n = 0;
};

struct FitArgs {
  std::string data;
  std::string link = "logit";
};

struct RobustnessArgs {
  std::string w;
  double vlow = 0.0;
  double vhigh = 0.0;
  bool unbounded = false;
};

struct SimulateArgs {
  std::string link = "logit";
  int n = 1000;
  std::uint64_t seed = 0;
  std::optional<double> wlow;
  std::optional<double> whigh;
  std::string out;
  bool full = false;
  unsigned threads = 1;
};

struct CurveArgs {
  std::string link = "logit";
  double from = -6.0;
  double to = 6.0;
  int steps = 120;
};

WeightVector weights_arg(const std::string& text) {
  const auto w = parse_list(text, 4);
  return WeightVector({w[0], w[1], w[2], w[3]});
}

void cmd_solve(const SolveArgs& args, std::ostream& out) {
  WeightVector w;
  if (!args.w.empty()) {
    w = weights_arg(args.w);
  } else {
    const auto b = parse_list(args.beta, 3);
    w = WeightVector(weights_from_beta(parse_link(args.link), {b[0], b[1], b[2]}));
  }
  const VarianceVector v = variance_from_weight(w);
  const SolveResult r = solve(v);
  json j;
  j["w"] = num_array(w);
  j["v"] = num_array(v);
  j["p"] = num_array(r.p);
  j["L"] = num(r.L_max);
  j["det"] = num(det_criterion(w, r.p));
  j["branch"] = std::string(to_string(r.branch));
  j["iterations"] = r.iterations;
  j["kkt_residual"] = num(r.kkt_residual);
  if (args.n > 0) j["allocation"] = allocate(r.p, args.n);
  out << j.dump(2) << '\n';
}

void cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  std::ifstream in(args.data);
  if (!in) throw IoError("cannot read '" + args.data + "'");
  const BinomialTable table = read_binomial_csv(in);
  const FitResult f = analyze(table, parse_link(args.link));
  for (const auto& w : f.warnings) err << "warning: " << w << '\n';
  json j;
  j["link"] = args.link;
  j["beta_hat"] = num_array(std::array{f.beta_hat.b0, f.beta_hat.b1, f.beta_hat.b2});
  j["w_hat"] = num_array(f.w_hat);
  j["p_opt"] = num_array(f.p_opt);
  j["det_opt"] = num(f.det_opt);
  j["det_uniform"] = num(f.det_uniform);
  j["uniform_efficiency"] = num(f.uniform_efficiency);
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  j["score_norm"] = num(f.score_norm);
  j["warnings"] = f.warnings;
  out << j.dump(2) << '\n';
}

void cmd_robustness(const RobustnessArgs& args, std::ostream& out) {
  const WeightVector w = weights_arg(args.w);
  const VarianceVector v = variance_from_weight(w);
  const SolveResult opt = solve(v);
  std::optional<RangeSpec> range;
  if (args.unbounded) {
    range = RangeSpec::unbounded(args.vlow > 0.0 ? args.vlow : v[0]);
  } else {
    if (!(args.vlow > 0.0 && args.vhigh > 0.0)) {
      throw ValidationError("robustness: give --vlow and --vhigh, or --unbounded");
    }
    range = RangeSpec(args.vlow, args.vhigh);
  }
  const RmaxReport rep = r_max(opt.p, v, *range);
  json j;
  j["r_max"] = num(rep.value);
  j["case"] = std::string(to_string(rep.rmax_case));
  j["pattern"] = rep.pattern ? json(std::string(to_string(*rep.pattern))) : json(nullptr);
  j["attaining_vt"] = rep.attaining_vt ? num_array(*rep.attaining_vt) : json(nullptr);
  j["theta"] = num(rep.theta);
  j["theta_star"] = num(theta_star());
  j["p_c"] = num_array(opt.p);
  out << j.dump(2) << '\n';
}

void cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  StudyConfig cfg = StudyConfig::defaults(parse_link(args.link));
  cfg.n_samples = args.n;
  cfg.seed = args.seed;
  if (args.wlow) cfg.w_low = *args.wlow;
  if (args.whigh) cfg.w_high = *args.whigh;
  cfg.keep_matrix = args.full;
  cfg.threads = args.threads;
  if (args.out.empty()) {
    throw ValidationError(std::string("simulate: --out DIR is required (or set ") + kOutDirEnv + ")");
  }
  const StudyResult result = run_study(cfg);
  export_study(result, args.out);
  json j;
  j["out"] = args.out;
  j["n_samples"] = result.samples.size();
  j["failed_samples"] = result.failed_samples;
  j["saturated_fraction"] = num(result.saturated_fraction);
  out << j.dump(2) << '\n';
}

void cmd_curve(const CurveArgs& args, std::ostream& out) {
  if (args.steps < 0) throw ValidationError("curve: --steps must be >= 0");
  std::vector<double> grid;
  for (int i = 0; i <= args.steps; ++i) {
    grid.push_back(args.steps == 0 ? args.from
                                   : args.from + (args.to - args.from) * i / args.steps);
  }
  const auto curve = weight_curve(parse_link(args.link), grid);
  write_curve_csv(out, curve);
}

bool has_flag(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<double> parse_list(const std::string& text, std::size_t count) {
  const auto fields = csv::split_line(text);
  if (fields.size() != count) {
    throw ValidationError("expected " + std::to_string(count) + " comma-separated numbers, got '" +
                          text + "'");
  }
  std::vector<double> out;
  for (const auto& f : fields) {
    const double x = csv::parse_double(f);
    if (!std::isfinite(x)) throw ValidationError("non-finite value in '" + text + "'");
    out.push_back(x);
  }
  return out;
}

std::vector<std::string> merge_config(const std::string& path, std::vector<std::string> args) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::string line;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("config: expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) throw ValidationError("config: empty key");
    if (has_flag(args, key)) continue;
    if (value == "true") {
      extra.push_back("--" + key);
    } else if (value != "false") {
      extra.push_back("--" + key + "=" + value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Locally D-optimal designs for 2x2 factorial experiments with binary response"};
  app.name("optdesign");
  app.require_subcommand(1);
  app.footer(
      "Any subcommand also accepts --config FILE with key=value lines (keys are flag names\n"
      "without dashes); flags given on the command line override the file.\n"
      "Exit codes: 0 ok, 2 usage/validation, 3 numerical failure, 4 I/O.");

  const std::vector<std::string> links{"logit", "probit", "loglog", "cloglog"};

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Locally D-optimal design for given weights or parameters");
  auto* w_opt = solve_cmd->add_option("--w", solve_args.w, "Weights w1,w2,w3,w4 at (+,+),(+,-),(-,+),(-,-)");
  auto* beta_opt = solve_cmd->add_option("--beta", solve_args.beta, "Parameters b0,b1,b2 of eta = b0 + b1 x1 + b2 x2");
  w_opt->excludes(beta_opt);
  solve_cmd->add_option("--link", solve_args.link, "Link used with --beta")->check(CLI::IsMember(links));
  solve_cmd->add_option("--n", solve_args.n, "Also round the design to N experimental units")->check(CLI::PositiveNumber);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the main-effects GLM to 2x2 cell counts and analyze the design");
  fit_cmd->add_option("--data", fit_args.data, "CSV file with columns x1,x2,successes,trials")->required();
  fit_cmd->add_option("--link", fit_args.link, "Link function")->check(CLI::IsMember(links));

  RobustnessArgs rob_args;
  auto* rob_cmd = app.add_subcommand("robustness", "Worst-case relative loss of the optimal design for --w");
  rob_cmd->add_option("--w", rob_args.w, "Assumed weights w1,w2,w3,w4")->required();
  auto* vlow = rob_cmd->add_option("--vlow", rob_args.vlow, "Lower bound a on every v = 1/w");
  auto* vhigh = rob_cmd->add_option("--vhigh", rob_args.vhigh, "Upper bound b on every v = 1/w");
  auto* unb = rob_cmd->add_flag("--unbounded", rob_args.unbounded, "Let b go to infinity");
  unb->excludes(vhigh);
  (void)vlow;

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo robustness study; writes samples.csv and summary.csv");
  sim_cmd->add_option("--link", sim_args.link, "Link function (sets the default weight range)")->check(CLI::IsMember(links));
  sim_cmd->add_option("--n", sim_args.n, "Number of sampled weight vectors")->check(CLI::Range(2, 1000000));
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed");
  sim_cmd->add_option("--wlow", sim_args.wlow, "Lower bound of the weight range");
  sim_cmd->add_option("--whigh", sim_args.whigh, "Upper bound of the weight range");
  sim_cmd->add_option("--out", sim_args.out, "Output directory")->envname(kOutDirEnv);
  sim_cmd->add_flag("--full", sim_args.full, "Also write the full loss matrix (matrix.csv)");
  sim_cmd->add_option("--threads", sim_args.threads, "Worker threads (0 = all cores)");

  CurveArgs curve_args;
  auto* curve_cmd = app.add_subcommand("curve", "Tabulate mean and weight against the linear predictor (CSV)");
  curve_cmd->add_option("--link", curve_args.link, "Link function")->check(CLI::IsMember(links));
  curve_cmd->add_option("--from", curve_args.from, "First eta");
  curve_cmd->add_option("--to", curve_args.to, "Last eta");
  curve_cmd->add_option("--steps", curve_args.steps, "Number of intervals (steps + 1 rows)");

  try {
    std::vector<std::string> args = raw_args;
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        continue;
      }
      args = merge_config(path, std::move(args));
      break;
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      for (auto* sub : app.get_subcommands()) err << sub->help();
      return kUsage;
    }

    if (solve_cmd->parsed()) {
      if (solve_args.w.empty() == solve_args.beta.empty()) {
        throw ValidationError("solve: give exactly one of --w or --beta");
      }
      cmd_solve(solve_args, out);
    } else if (fit_cmd->parsed()) {
      cmd_fit(fit_args, out, err);
    } else if (rob_cmd->parsed()) {
      cmd_robustness(rob_args, out);
    } else if (sim_cmd->parsed()) {
      cmd_simulate(sim_args, out);
    } else if (curve_cmd->parsed()) {
      cmd_curve(curve_args, out);
    }
    return kOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIo;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace optdesign::cli
