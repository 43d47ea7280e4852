#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "embedded_example.hpp"
#include "report.hpp"

#include "jumphinf/errors.hpp"
#include "jumphinf/markov.hpp"
#include "jumphinf/model.hpp"
#include "jumphinf/sim.hpp"
#include "jumphinf/solver.hpp"
#include "jumphinf/synthesis.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jumphinf;
using tools::RunConfig;
using tools::RunReport;

namespace {

struct CliOptions {
  std::string config_path;
  std::optional<double> gamma;
  std::optional<std::int64_t> seed;
  std::string out = ".";
  std::optional<int> threads;
  std::string format = "json";
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

class Runner {
 public:
  Runner(std::string command, std::string out_dir, std::string format)
      : out_(std::move(out_dir)), format_(std::move(format)) {
    report_.command = std::move(command);
    fs::create_directories(out_);
  }

  RunReport& report() { return report_; }

  void stage(const std::string& name, const std::string& status,
             const std::string& detail, double seconds) {
    report_.stages.push_back({name, status, detail, seconds});
    std::cerr << "[" << report_.command << "] " << name << ": " << status;
    if (!detail.empty()) std::cerr << " (" << detail << ")";
    std::cerr << "\n";
  }

  void emit(const std::string& name, const std::string& content) {
    std::ofstream f(out_ / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (out_ / name).string());
    f << content;
    report_.manifest.emplace_back(name, tools::Sha256::of(content));
  }

  int finish(int code) {
    const std::string name = format_ == "csv" ? "report.csv" : "report.json";
    const std::string content =
        format_ == "csv" ? report_.to_csv() : report_.to_json().dump(2) + "\n";
    std::ofstream f(out_ / name, std::ios::binary);
    if (f) f << content;
    std::cout << report_.command << ": exit " << code << "; report "
              << (out_ / name).string() << "\n";
    return code;
  }

 private:
  RunReport report_;
  fs::path out_;
  std::string format_;
};

json matrix_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

int resolve_threads(const CliOptions& opt, int config_threads) {
  if (opt.threads) return std::max(1, *opt.threads);
  if (const char* env = std::getenv("JUMPHINF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1, config_threads);
}

RunConfig load_config(const CliOptions& opt, bool allow_embedded) {
  RunConfig cfg =
      opt.config_path.empty()
          ? (allow_embedded
                 ? tools::parse_config_text(tools::kExampleConfig,
                                            "<bundled example>")
                 : throw ConfigError("--config is required for this command"))
          : tools::parse_config(opt.config_path);
  if (opt.gamma) {
    if (!(*opt.gamma > 0)) throw ConfigError("--gamma must be positive");
    cfg.model.gamma = *opt.gamma;
  }
  if (opt.seed) {
    cfg.solver.seed = static_cast<std::uint64_t>(*opt.seed);
    cfg.simulation.seed = static_cast<std::uint64_t>(*opt.seed);
  }
  cfg.solver.threads = resolve_threads(opt, cfg.solver.threads);
  return cfg;
}

Controller pick_controller(const RunConfig& cfg) {
  const std::string& kind = cfg.simulation.controller;
  if (kind == "none") return Controller::none();
  if (kind == "local") {
    if (!cfg.reference.has_local)
      throw ConfigError("simulation.controller=local needs reference_gains.local");
    return Controller::local(cfg.reference.local_gains);
  }
  if (!cfg.reference.has_global)
    throw ConfigError("simulation.controller=global needs reference_gains.global");
  return Controller::global(cfg.reference.global_gains);
}

struct SimBundle {
  std::vector<double> times;
  Eigen::VectorXd mean_xsq;
  double x0_sqnorm = 0.0;
  MssVerdict verdict = MssVerdict::Indeterminate;
  double final_ratio = 0.0;
  bool iqc_all_pass = true;
  double iqc_worst_local = std::numeric_limits<double>::infinity();
  double iqc_worst_inter = std::numeric_limits<double>::infinity();
  bool iqc_mean_all_pass = true;
};

SimBundle run_sim_bundle(const RunConfig& cfg, const Controller& controller,
                         Runner& run, int max_csv) {
  const auto& sc = cfg.simulation;
  const int K = static_cast<int>(std::llround(sc.T / sc.dt));
  SimBundle out;
  out.mean_xsq = Eigen::VectorXd::Zero(K + 1);

  const int n_checks =
      static_cast<int>(sc.checkpoints.size()) * cfg.model.subsystem_count();
  std::vector<double> mean_lhs_local(n_checks, 0.0);
  std::vector<double> mean_lhs_inter(n_checks, 0.0);

  for (int k = 0; k < sc.n_traj; ++k) {
    TrajectoryRecord rec =
        simulate(cfg.model, controller, sc.uncertainty, {sc.disturbance}, sc.T,
                 sc.dt, sc.seed, static_cast<std::uint64_t>(k));
    if (out.times.empty()) {
      out.times = rec.times;
      out.x0_sqnorm = rec.x0_sqnorm;
    }
    for (int j = 0; j <= K; ++j) out.mean_xsq[j] += rec.xsq_at(j);

    const IqcReport audit = iqc_audit(rec, cfg.model.budgets, sc.checkpoints);
    out.iqc_all_pass = out.iqc_all_pass && audit.all_pass();
    out.iqc_worst_local = std::min(out.iqc_worst_local, audit.worst_local());
    out.iqc_worst_inter = std::min(out.iqc_worst_inter, audit.worst_inter());
    for (int c = 0; c < n_checks; ++c) {
      mean_lhs_local[c] += audit.checks[c].lhs_local;
      mean_lhs_inter[c] += audit.checks[c].lhs_inter;
    }

    if (k < max_csv) {
      char name[32];
      std::snprintf(name, sizeof(name), "trajectory_%03d.csv", k);
      run.emit(name, rec.to_csv());
    }
  }
  out.mean_xsq /= sc.n_traj;
  for (int c = 0; c < n_checks; ++c) {
    if (mean_lhs_local[c] / sc.n_traj < -1e-9) out.iqc_mean_all_pass = false;
    if (mean_lhs_inter[c] / sc.n_traj < -1e-9) out.iqc_mean_all_pass = false;
  }

  const double final_mean = out.mean_xsq[K];
  out.final_ratio =
      out.x0_sqnorm > 0 ? final_mean / out.x0_sqnorm
                        : (final_mean > 0 ? std::numeric_limits<double>::infinity()
                                          : 0.0);
  if (!std::isfinite(final_mean) || final_mean >= 10.0 * out.x0_sqnorm)
    out.verdict = MssVerdict::Diverged;
  else if (final_mean <= 0.01 * out.x0_sqnorm)
    out.verdict = MssVerdict::Decayed;

  std::string curve = "t,mean_xsq\n";
  for (int j = 0; j <= K; ++j) {
    curve += std::to_string(out.times[j]);
    curve += ",";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", out.mean_xsq[j]);
    curve += buf;
    curve += "\n";
  }
  run.emit("mean_xsq.csv", curve);
  return out;
}

const char* verdict_name(MssVerdict v) {
  switch (v) {
    case MssVerdict::Decayed:
      return "decayed";
    case MssVerdict::Diverged:
      return "diverged";
    case MssVerdict::Indeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

json bundle_json(const SimBundle& b) {
  json j;
  j["verdict"] = verdict_name(b.verdict);
  j["final_ratio"] = b.final_ratio;
  j["x0_sqnorm"] = b.x0_sqnorm;
  j["iqc"] = {{"all_pass", b.iqc_all_pass},
              {"mean_all_pass", b.iqc_mean_all_pass},
              {"worst_local", b.iqc_worst_local},
              {"worst_inter", b.iqc_worst_inter}};
  return j;
}

int cmd_validate(const RunConfig& cfg, Runner& run) {
  Stopwatch sw;
  const AssumptionReport rep = validate_assumptions(cfg.model);
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"subsystem", c.subsystem},
                      {"local_mode", c.local_mode},
                      {"name", c.name},
                      {"pass", c.pass},
                      {"detail", c.detail}});
  run.report().certificates["assumptions"] = checks;
  run.report().certificates["notes"] = rep.notes;
  run.stage("validate_assumptions", rep.all_pass() ? "pass" : "fail",
            std::to_string(rep.checks.size()) + " checks", sw.seconds());
  return rep.all_pass() ? 0 : 3;
}

int cmd_synthesize(const RunConfig& cfg, Runner& run) {
  Stopwatch sw;
  const SynthesisResult result =
      synthesize(cfg.model, cfg.model.gamma, cfg.solver);
  run.stage("synthesize", status_name(result.status),
            "stage=" + result.stage + ", iters=" +
                std::to_string(result.solver_iterations),
            sw.seconds());
  run.emit("gains.json", to_json(result));
  run.report().certificates["gamma"] = result.gamma;
  run.report().certificates["max_margin"] = result.margins.max_margin;
  if (result.feasible()) {
    run.report().certificates["gain_gap_all_pass"] = result.gaps.all_pass();
    run.report().certificates["gain_gap_worst_excess"] =
        result.gaps.worst_excess();
  }
  return result.feasible() ? 0 : 2;
}

int cmd_localize(const RunConfig& cfg, Runner& run) {
  if (!cfg.reference.has_global)
    throw ConfigError("localize needs reference_gains.global in the config");
  Stopwatch sw;
  const Eigen::RowVectorXd q = steady_state(cfg.model.Q);
  const GainTable local =
      localize_gains(cfg.reference.global_gains, cfg.model.pattern_map, q);
  json out;
  out["schema_version"] = 1;
  out["q_inf"] = std::vector<double>(q.data(), q.data() + q.size());
  json jl = json::array();
  for (std::size_t i = 0; i < local.size(); ++i)
    for (std::size_t nu = 0; nu < local[i].size(); ++nu)
      jl.push_back(
          {{"i", i + 1}, {"nu", nu + 1}, {"K", matrix_json(local[i][nu])}});
  out["local_gains"] = std::move(jl);
  run.emit("localized.json", out.dump(2) + "\n");

  if (cfg.reference.has_local) {
    double worst = 0.0;
    json cmp = json::array();
    for (std::size_t i = 0; i < local.size(); ++i)
      for (std::size_t nu = 0; nu < local[i].size(); ++nu) {
        const double err =
            (local[i][nu] - cfg.reference.local_gains[i][nu])
                .cwiseAbs()
                .maxCoeff();
        worst = std::max(worst, err);
        cmp.push_back({{"i", i + 1}, {"nu", nu + 1}, {"max_abs_err", err}});
      }
    run.report().certificates["comparison"] = std::move(cmp);
    run.report().certificates["max_abs_err"] = worst;
  }
  run.stage("localize", "done", "", sw.seconds());
  return 0;
}

int cmd_verify(const RunConfig& cfg, Runner& run) {
  if (!cfg.reference.has_global)
    throw ConfigError("verify needs reference_gains.global in the config");
  Stopwatch sw;
  const FeasibilityOutcome brl = verify_nominal_brl(
      cfg.model, cfg.reference.global_gains, cfg.model.gamma, cfg.solver);
  run.stage("verify_nominal_brl", status_name(brl.status),
            "max_margin=" + std::to_string(brl.certificate.max_margin),
            sw.seconds());
  run.report().certificates["brl_status"] = status_name(brl.status);
  run.report().certificates["brl_max_margin"] = brl.certificate.max_margin;
  run.report().certificates["gamma"] = cfg.model.gamma;

  Stopwatch sw2;
  const Eigen::RowVectorXd q = steady_state(cfg.model.Q);
  const GainTable local =
      localize_gains(cfg.reference.global_gains, cfg.model.pattern_map, q);
  json gaps = json::array();
  const bool has_beta = !cfg.reference.beta_u.empty();
  bool gaps_pass = true;
  for (int i = 1; i <= cfg.model.subsystem_count(); ++i)
    for (int mu = 1; mu <= cfg.model.global_mode_count(); ++mu) {
      const int nu = cfg.model.pattern_map.local_mode(i, mu);
      const Eigen::MatrixXd delta =
          cfg.reference.global_gains[i - 1][mu - 1] - local[i - 1][nu - 1];
      const double norm = delta.jacobiSvd().singularValues()[0];
      json e{{"i", i}, {"mu", mu}, {"norm", norm}};
      if (has_beta) {
        const double bu = cfg.reference.beta_u[i - 1][mu - 1];
        e["beta_u"] = bu;
        e["pass"] = norm * norm <= bu + 1e-9;
        gaps_pass = gaps_pass && (norm * norm <= bu + 1e-9);
      }
      gaps.push_back(std::move(e));
    }
  run.report().certificates["gain_gaps"] = std::move(gaps);
  if (has_beta) run.report().certificates["gain_gap_all_pass"] = gaps_pass;
  run.stage("gain_gap_check", has_beta ? (gaps_pass ? "pass" : "fail") : "info",
            "", sw2.seconds());
  return brl.feasible() ? 0 : 2;
}

int cmd_simulate(const RunConfig& cfg, Runner& run) {
  const Controller controller = pick_controller(cfg);
  Stopwatch sw;
  const SimBundle bundle = run_sim_bundle(cfg, controller, run, 5);
  run.stage("simulate", verdict_name(bundle.verdict),
            std::to_string(cfg.simulation.n_traj) + " trajectories",
            sw.seconds());
  json summary = bundle_json(bundle);
  summary["schema_version"] = 1;
  summary["controller"] = cfg.simulation.controller;
  run.emit("summary.json", summary.dump(2) + "\n");
  run.report().certificates["simulation"] = bundle_json(bundle);
  return 0;
}

int cmd_reproduce(const RunConfig& cfg, Runner& run) {
  Stopwatch sw_val;
  const AssumptionReport rep = validate_assumptions(cfg.model);
  run.stage("validate_assumptions", rep.all_pass() ? "pass" : "fail", "",
            sw_val.seconds());
  if (!rep.all_pass()) return 3;

  Stopwatch sw_syn;
  const SynthesisResult result =
      synthesize(cfg.model, cfg.model.gamma, cfg.solver);
  run.stage("synthesize", status_name(result.status),
            "stage=" + result.stage, sw_syn.seconds());
  run.emit("gains.json", to_json(result));
  run.report().certificates["gamma"] = result.gamma;
  run.report().certificates["max_margin"] = result.margins.max_margin;
  if (!result.feasible()) return 2;
  run.report().certificates["gain_gap_all_pass"] = result.gaps.all_pass();

  if (cfg.reference.has_local) {
    json cmp = json::array();
    for (std::size_t i = 0; i < result.local_gains.size(); ++i)
      for (std::size_t nu = 0; nu < result.local_gains[i].size(); ++nu) {
        const Eigen::MatrixXd& mine = result.local_gains[i][nu];
        const Eigen::MatrixXd& ref = cfg.reference.local_gains[i][nu];
        cmp.push_back({{"i", i + 1},
                       {"nu", nu + 1},
                       {"synthesized", matrix_json(mine)},
                       {"reference", matrix_json(ref)},
                       {"max_abs_diff", (mine - ref).cwiseAbs().maxCoeff()}});
      }
    run.report().certificates["reference_comparison"] = std::move(cmp);
  }

  Stopwatch sw_brl;
  const FeasibilityOutcome brl = verify_nominal_brl(
      cfg.model, result.global_gains, result.gamma, cfg.solver);
  run.stage("verify_nominal_brl", status_name(brl.status),
            "max_margin=" + std::to_string(brl.certificate.max_margin),
            sw_brl.seconds());
  run.report().certificates["brl_status"] = status_name(brl.status);
  if (!brl.feasible()) return 2;

  Stopwatch sw_sim;
  const Controller controller = Controller::local(result.local_gains);
  const SimBundle bundle = run_sim_bundle(cfg, controller, run, 5);
  run.stage("simulate_closed_loop", verdict_name(bundle.verdict),
            std::to_string(cfg.simulation.n_traj) + " trajectories",
            sw_sim.seconds());
  run.report().certificates["simulation"] = bundle_json(bundle);

  Stopwatch sw_hinf;
  const double witness = estimate_hinf_lower(
      cfg.model, controller, cfg.simulation.uncertainty,
      {{cfg.simulation.disturbance}}, cfg.simulation.n_traj, cfg.simulation.T,
      cfg.simulation.dt, cfg.simulation.seed, cfg.solver.threads);
  run.stage("estimate_hinf_lower",
            witness < result.gamma ? "consistent" : "violation",
            "witness=" + std::to_string(witness), sw_hinf.seconds());
  run.report().certificates["hinf_witness"] = witness;
  run.report().certificates["hinf_witness_below_gamma"] =
      witness < result.gamma;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "jumphinf: decentralized H-infinity synthesis for Markov jump "
      "large-scale systems"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opt.config_path,
                              "JSON configuration file");
    if (config_required) c->required();
    sub->add_option("--gamma", opt.gamma, "Override the performance level");
    sub->add_option("--seed", opt.seed, "Override solver and simulation seeds");
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", opt.threads,
                    "Worker threads (JUMPHINF_THREADS as fallback)");
    sub->add_option("--format", opt.format, "Report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
  };

  CLI::App* validate =
      app.add_subcommand("validate", "Check model assumptions");
  CLI::App* synthesize_cmd =
      app.add_subcommand("synthesize", "Solve the synthesis conditions");
  CLI::App* localize =
      app.add_subcommand("localize", "Average global gains into local gains");
  CLI::App* verify = app.add_subcommand(
      "verify", "Certify supplied gains: closed-loop norm bound and gain gaps");
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Monte Carlo closed-loop simulation");
  CLI::App* reproduce = app.add_subcommand(
      "reproduce-example", "Run the bundled three-subsystem example end to end");
  for (CLI::App* sub :
       {validate, synthesize_cmd, localize, verify, simulate_cmd})
    add_common(sub, true);
  add_common(reproduce, false);

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Runner run(command, opt.out, opt.format);
    int code = 4;
    try {
      RunConfig cfg = load_config(opt, command == "reproduce-example");
      run.report().config_hash =
          tools::Sha256::of(tools::canonical_config_dump(cfg));
      if (command == "validate")
        code = cmd_validate(cfg, run);
      else if (command == "synthesize")
        code = cmd_synthesize(cfg, run);
      else if (command == "localize")
        code = cmd_localize(cfg, run);
      else if (command == "verify")
        code = cmd_verify(cfg, run);
      else if (command == "simulate")
        code = cmd_simulate(cfg, run);
      else
        code = cmd_reproduce(cfg, run);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      run.stage("error", "config", e.what(), 0.0);
      code = 4;
    } catch (const NotErgodic& e) {
      std::cerr << "validation error: " << e.what() << "\n";
      run.stage("error", "validation", e.what(), 0.0);
      code = 3;
    } catch (const AssumptionViolation& e) {
      std::cerr << "validation error: " << e.what() << "\n";
      run.stage("error", "validation", e.what(), 0.0);
      code = 3;
    } catch (const DegenerateModeClass& e) {
      std::cerr << "validation error: " << e.what() << "\n";
      run.stage("error", "validation", e.what(), 0.0);
      code = 3;
    } catch (const RefinementFailed& e) {
      std::cerr << "solver error: " << e.what() << "\n";
      run.stage("error", "solver", e.what(), 0.0);
      code = 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      run.stage("error", "internal", e.what(), 0.0);
      code = 4;
    }
    return run.finish(code);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 4;
  }
}
