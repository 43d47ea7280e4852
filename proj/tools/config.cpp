#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "jumphinf/errors.hpp"

namespace jumphinf::tools {

namespace {

using nlohmann::json;

struct Parser {
  std::vector<std::string> errs;

  void fail(const std::string& path, const std::string& expected,
            const std::string& found) {
    errs.push_back(path + ": expected " + expected + ", found " + found);
  }

  const json* get(const json& j, const std::string& key,
                  const std::string& path, bool required = true) {
    if (!j.is_object()) {
      fail(path, "object", j.type_name());
      return nullptr;
    }
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path + "." + key, "a value", "nothing");
      return nullptr;
    }
    return &*it;
  }

  double number(const json& j, const std::string& path, double fallback) {
    if (!j.is_number()) {
      fail(path, "number", j.type_name());
      return fallback;
    }
    return j.get<double>();
  }

  int integer(const json& j, const std::string& path, int fallback) {
    if (!j.is_number_integer()) {
      fail(path, "integer", j.type_name());
      return fallback;
    }
    return j.get<int>();
  }

  std::string text(const json& j, const std::string& path,
                   const std::string& fallback) {
    if (!j.is_string()) {
      fail(path, "string", j.type_name());
      return fallback;
    }
    return j.get<std::string>();
  }

  // rows/cols -1 leave the dimension free.
  Eigen::MatrixXd matrix(const json& j, const std::string& path, int rows,
                         int cols) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
      fail(path, "array of row arrays", j.type_name());
      return Eigen::MatrixXd::Zero(std::max(rows, 0), std::max(cols, 0));
    }
    const int r = static_cast<int>(j.size());
    const int c = static_cast<int>(j.front().size());
    if ((rows >= 0 && r != rows) || (cols >= 0 && c != cols)) {
      std::ostringstream want;
      want << (rows >= 0 ? std::to_string(rows) : std::string("any")) << "x"
           << (cols >= 0 ? std::to_string(cols) : std::string("any"));
      fail(path, want.str() + " matrix",
           std::to_string(r) + "x" + std::to_string(c));
      return Eigen::MatrixXd::Zero(std::max(rows, 0), std::max(cols, 0));
    }
    Eigen::MatrixXd M(r, c);
    for (int a = 0; a < r; ++a) {
      const json& row = j[a];
      if (!row.is_array() || static_cast<int>(row.size()) != c) {
        fail(path, "rows of equal length", "ragged row " + std::to_string(a));
        return Eigen::MatrixXd::Zero(r, c);
      }
      for (int b = 0; b < c; ++b)
        M(a, b) = number(row[b], path + "[" + std::to_string(a) + "][" +
                                     std::to_string(b) + "]", 0.0);
    }
    return M;
  }

  Eigen::VectorXd vector(const json& j, const std::string& path, int len) {
    if (!j.is_array()) {
      fail(path, "array", j.type_name());
      return Eigen::VectorXd::Zero(std::max(len, 0));
    }
    if (len >= 0 && static_cast<int>(j.size()) != len) {
      fail(path, std::to_string(len) + " entries", std::to_string(j.size()));
      return Eigen::VectorXd::Zero(len);
    }
    Eigen::VectorXd v(j.size());
    for (std::size_t k = 0; k < j.size(); ++k)
      v[static_cast<int>(k)] =
          number(j[k], path + "[" + std::to_string(k) + "]", 0.0);
    return v;
  }

  void done(const std::string& origin) {
    if (errs.empty()) return;
    std::ostringstream os;
    os << origin << " is invalid:";
    for (const auto& e : errs) os << "\n  " << e;
    throw ConfigError(os.str());
  }
};

UncertaintyOperator parse_operator(Parser& p, const json& j,
                                   const std::string& path,
                                   UncertaintyOperator::Kind kind) {
  UncertaintyOperator op;
  op.kind = kind;
  if (const json* a = p.get(j, "A", path)) op.A = p.matrix(*a, path + ".A", -1, -1);
  const int ns = static_cast<int>(op.A.rows());
  if (const json* b = p.get(j, "B", path)) op.B = p.matrix(*b, path + ".B", ns, -1);
  if (const json* c = p.get(j, "C", path)) op.C = p.matrix(*c, path + ".C", -1, ns);
  if (const json* d = p.get(j, "D", path))
    op.D = p.matrix(*d, path + ".D", static_cast<int>(op.C.rows()),
                    static_cast<int>(op.B.cols()));
  if (const json* x = p.get(j, "x0", path, false))
    op.x0 = p.vector(*x, path + ".x0", ns);
  return op;
}

DisturbanceSignal parse_disturbance(Parser& p, const json& j,
                                    const std::string& path) {
  const json* fam = p.get(j, "family", path);
  if (!fam) return DisturbanceSignal::zero();
  const std::string f = p.text(*fam, path + ".family", "zero");
  if (f == "zero") return DisturbanceSignal::zero();
  if (f == "exp_decay") {
    double amp = 0.0, rate = 0.0;
    if (const json* a = p.get(j, "amplitude", path))
      amp = p.number(*a, path + ".amplitude", 0.0);
    if (const json* r = p.get(j, "rate", path))
      rate = p.number(*r, path + ".rate", 0.0);
    return DisturbanceSignal::exp_decay(amp, rate);
  }
  if (f == "sampled") {
    std::vector<double> ts, vs;
    if (const json* t = p.get(j, "times", path)) {
      const Eigen::VectorXd v = p.vector(*t, path + ".times", -1);
      ts.assign(v.data(), v.data() + v.size());
    }
    if (const json* t = p.get(j, "values", path)) {
      const Eigen::VectorXd v = p.vector(*t, path + ".values", -1);
      vs.assign(v.data(), v.data() + v.size());
    }
    if (ts.size() != vs.size() || ts.empty()) {
      p.fail(path, "matching nonempty times/values arrays",
             std::to_string(ts.size()) + " vs " + std::to_string(vs.size()));
      return DisturbanceSignal::zero();
    }
    return DisturbanceSignal::sampled(std::move(ts), std::move(vs));
  }
  p.fail(path + ".family", "zero | exp_decay | sampled", f);
  return DisturbanceSignal::zero();
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

json operator_to_json(const UncertaintyOperator& op) {
  json j;
  j["A"] = matrix_to_json(op.A);
  j["B"] = matrix_to_json(op.B);
  j["C"] = matrix_to_json(op.C);
  j["D"] = matrix_to_json(op.D);
  if (op.x0.size()) j["x0"] = vector_to_json(op.x0);
  return j;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": not valid JSON: " + e.what());
  }

  Parser p;
  int schema_version = 1;
  if (const json* sv = p.get(root, "schema_version", "config"))
    schema_version = p.integer(*sv, "config.schema_version", 1);
  if (schema_version != 1)
    p.fail("config.schema_version", "1", std::to_string(schema_version));

  const json* jm = p.get(root, "model", "config");
  p.done(origin);

  std::vector<std::vector<int>> patterns;
  if (const json* jp = p.get(*jm, "patterns", "model")) {
    if (!jp->is_array() || jp->empty())
      p.fail("model.patterns", "nonempty array", jp->type_name());
    else
      for (std::size_t mu = 0; mu < jp->size(); ++mu) {
        const json& tup = (*jp)[mu];
        std::vector<int> t;
        if (!tup.is_array()) {
          p.fail("model.patterns[" + std::to_string(mu) + "]", "array",
                 tup.type_name());
        } else {
          for (std::size_t i = 0; i < tup.size(); ++i)
            t.push_back(p.integer(tup[i],
                                  "model.patterns[" + std::to_string(mu) + "][" +
                                      std::to_string(i) + "]",
                                  1));
        }
        patterns.push_back(std::move(t));
      }
  }

  Eigen::MatrixXd Q;
  if (const json* jq = p.get(*jm, "Q", "model")) Q = p.matrix(*jq, "model.Q", -1, -1);

  double gamma = 1.0;
  if (const json* jg = p.get(*jm, "gamma", "model"))
    gamma = p.number(*jg, "model.gamma", 1.0);
  if (!(gamma > 0)) p.fail("model.gamma", "positive number", std::to_string(gamma));

  int eta0 = 1;
  if (const json* je = p.get(*jm, "eta0", "model", false))
    eta0 = p.integer(*je, "model.eta0", 1);

  std::vector<SubsystemModel> subsystems;
  std::vector<UncertaintyBudget> budgets;
  std::vector<Eigen::VectorXd> x0;
  if (const json* js = p.get(*jm, "subsystems", "model")) {
    if (!js->is_array() || js->empty())
      p.fail("model.subsystems", "nonempty array", js->type_name());
    else
      for (std::size_t idx = 0; idx < js->size(); ++idx) {
        const std::string sp = "model.subsystems[" + std::to_string(idx + 1) + "]";
        const json& jsub = (*js)[idx];
        SubsystemModel s;
        if (const json* v = p.get(jsub, "n", sp)) s.n = p.integer(*v, sp + ".n", 1);
        if (const json* v = p.get(jsub, "m", sp)) s.m = p.integer(*v, sp + ".m", 1);
        auto family = [&](const char* name, int rows, int cols,
                          std::vector<Eigen::MatrixXd>& out) {
          const json* v = p.get(jsub, name, sp);
          if (!v) return;
          if (!v->is_array() || v->empty()) {
            p.fail(sp + "." + name, "array of per-mode matrices", v->type_name());
            return;
          }
          for (std::size_t nu = 0; nu < v->size(); ++nu)
            out.push_back(p.matrix((*v)[nu],
                                   sp + "." + name + "[" + std::to_string(nu + 1) + "]",
                                   rows, cols));
        };
        family("A", s.n, s.n, s.A);
        family("B", s.n, s.m, s.B);
        family("C", -1, s.n, s.C);
        family("D", s.C.empty() ? -1 : static_cast<int>(s.C.front().rows()), s.m,
               s.D);
        family("E", s.n, -1, s.E);
        family("F", s.n, -1, s.F);
        family("G", s.n, -1, s.G);
        family("H", -1, s.n, s.H);

        UncertaintyBudget b;
        if (const json* v = p.get(jsub, "S_bar", sp))
          b.S_bar = p.matrix(*v, sp + ".S_bar", s.n, s.n);
        if (const json* v = p.get(jsub, "S_tilde", sp))
          b.S_tilde = p.matrix(*v, sp + ".S_tilde", s.n, s.n);

        Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(s.n);
        if (const json* v = p.get(jsub, "x0", sp))
          xi0 = p.vector(*v, sp + ".x0", s.n);

        subsystems.push_back(std::move(s));
        budgets.push_back(std::move(b));
        x0.push_back(std::move(xi0));
      }
  }
  SolverOptions solver;
  if (const json* jo = p.get(root, "solver", "config", false)) {
    if (const json* v = p.get(*jo, "max_iters", "solver", false))
      solver.max_iters = p.integer(*v, "solver.max_iters", solver.max_iters);
    if (const json* v = p.get(*jo, "residual_tol", "solver", false))
      solver.residual_tol = p.number(*v, "solver.residual_tol", solver.residual_tol);
    if (const json* v = p.get(*jo, "stall_window", "solver", false))
      solver.stall_window = p.integer(*v, "solver.stall_window", solver.stall_window);
    if (const json* v = p.get(*jo, "restarts", "solver", false))
      solver.restarts = p.integer(*v, "solver.restarts", solver.restarts);
    if (const json* v = p.get(*jo, "seed", "solver", false))
      solver.seed = static_cast<std::uint64_t>(
          p.integer(*v, "solver.seed", static_cast<int>(solver.seed)));
    if (const json* v = p.get(*jo, "epsilon", "solver", false))
      solver.epsilon = p.number(*v, "solver.epsilon", solver.epsilon);
    if (const json* v = p.get(*jo, "threads", "solver", false))
      solver.threads = p.integer(*v, "solver.threads", solver.threads);
    if (const json* v = p.get(*jo, "acceleration", "solver", false)) {
      const std::string a = p.text(*v, "solver.acceleration", "plain");
      if (a == "plain")
        solver.accel = Accel::None;
      else if (a == "reflected")
        solver.accel = Accel::Reflected;
      else
        p.fail("solver.acceleration", "plain | reflected", a);
    }
  }
  p.done(origin);

  LargeScaleModel model{std::move(subsystems),
                        ModePatternMap(std::move(patterns)),
                        TransitionRateMatrix(Q),
                        gamma,
                        std::move(budgets),
                        std::move(x0),
                        eta0};
  model.check_consistency();

  SimulationConfig sim;
  if (const json* jo = p.get(root, "simulation", "config", false)) {
    if (const json* v = p.get(*jo, "T", "simulation", false))
      sim.T = p.number(*v, "simulation.T", sim.T);
    if (const json* v = p.get(*jo, "dt", "simulation", false))
      sim.dt = p.number(*v, "simulation.dt", sim.dt);
    if (const json* v = p.get(*jo, "n_traj", "simulation", false))
      sim.n_traj = p.integer(*v, "simulation.n_traj", sim.n_traj);
    if (const json* v = p.get(*jo, "seed", "simulation", false))
      sim.seed = static_cast<std::uint64_t>(
          p.integer(*v, "simulation.seed", static_cast<int>(sim.seed)));
    if (const json* v = p.get(*jo, "disturbance", "simulation", false))
      sim.disturbance = parse_disturbance(p, *v, "simulation.disturbance");
    if (const json* v = p.get(*jo, "checkpoints", "simulation", false)) {
      const Eigen::VectorXd c = p.vector(*v, "simulation.checkpoints", -1);
      sim.checkpoints.assign(c.data(), c.data() + c.size());
    }
    if (const json* v = p.get(*jo, "controller", "simulation", false)) {
      sim.controller = p.text(*v, "simulation.controller", "local");
      if (sim.controller != "none" && sim.controller != "local" &&
          sim.controller != "global")
        p.fail("simulation.controller", "none | local | global", sim.controller);
    }
    if (const json* v = p.get(*jo, "uncertainty", "simulation", false)) {
      if (!v->is_array() ||
          static_cast<int>(v->size()) != model.subsystem_count())
        p.fail("simulation.uncertainty",
               "array with one entry per subsystem", v->type_name());
      else
        for (std::size_t i = 0; i < v->size(); ++i) {
          const std::string up =
              "simulation.uncertainty[" + std::to_string(i + 1) + "]";
          const json& ju = (*v)[i];
          SubsystemUncertainty slot;
          if (const json* lo = p.get(ju, "local", up, false))
            slot.local =
                parse_operator(p, *lo, up + ".local", UncertaintyOperator::Kind::Local);
          if (const json* in = p.get(ju, "inter", up, false))
            slot.inter = parse_operator(p, *in, up + ".inter",
                                        UncertaintyOperator::Kind::Interconnection);
          sim.uncertainty.push_back(std::move(slot));
        }
    }
  }
  if (!(sim.T > 0) || !(sim.dt > 0) || sim.dt > sim.T)
    p.fail("simulation", "0 < dt <= T",
           "T=" + std::to_string(sim.T) + " dt=" + std::to_string(sim.dt));
  if (sim.n_traj < 1)
    p.fail("simulation.n_traj", ">= 1", std::to_string(sim.n_traj));
  if (sim.checkpoints.empty())
    for (int t = 1; t <= static_cast<int>(std::floor(sim.T)); ++t)
      sim.checkpoints.push_back(t);

  ReferenceGains ref;
  if (const json* jr = p.get(root, "reference_gains", "config", false)) {
    const int N = model.subsystem_count();
    const int M = model.global_mode_count();
    if (const json* jg = p.get(*jr, "global", "reference_gains", false)) {
      ref.has_global = true;
      ref.global_gains.assign(N, std::vector<Eigen::MatrixXd>(M));
      std::vector<std::vector<bool>> seen(N, std::vector<bool>(M, false));
      if (!jg->is_array())
        p.fail("reference_gains.global", "array", jg->type_name());
      else
        for (std::size_t k = 0; k < jg->size(); ++k) {
          const std::string gp =
              "reference_gains.global[" + std::to_string(k) + "]";
          const json& je = (*jg)[k];
          int i = 0, mu = 0;
          if (const json* v = p.get(je, "i", gp)) i = p.integer(*v, gp + ".i", 0);
          if (const json* v = p.get(je, "mu", gp)) mu = p.integer(*v, gp + ".mu", 0);
          if (i < 1 || i > N || mu < 1 || mu > M) {
            p.fail(gp, "i in 1.." + std::to_string(N) + ", mu in 1.." +
                           std::to_string(M),
                   "i=" + std::to_string(i) + " mu=" + std::to_string(mu));
            continue;
          }
          if (const json* v = p.get(je, "K", gp))
            ref.global_gains[i - 1][mu - 1] =
                p.matrix(*v, gp + ".K", model.subsystems[i - 1].m,
                         model.subsystems[i - 1].n);
          seen[i - 1][mu - 1] = true;
        }
      for (int i = 0; i < N; ++i)
        for (int mu = 0; mu < M; ++mu)
          if (!seen[i][mu])
            p.fail("reference_gains.global", "entry for every (i, mu)",
                   "missing i=" + std::to_string(i + 1) +
                       " mu=" + std::to_string(mu + 1));
    }
    if (const json* jl = p.get(*jr, "local", "reference_gains", false)) {
      ref.has_local = true;
      ref.local_gains.resize(N);
      for (int i = 1; i <= N; ++i)
        ref.local_gains[i - 1].resize(model.pattern_map.local_mode_count(i));
      std::vector<std::vector<bool>> seen(N);
      for (int i = 1; i <= N; ++i)
        seen[i - 1].assign(model.pattern_map.local_mode_count(i), false);
      if (!jl->is_array())
        p.fail("reference_gains.local", "array", jl->type_name());
      else
        for (std::size_t k = 0; k < jl->size(); ++k) {
          const std::string gp =
              "reference_gains.local[" + std::to_string(k) + "]";
          const json& je = (*jl)[k];
          int i = 0, nu = 0;
          if (const json* v = p.get(je, "i", gp)) i = p.integer(*v, gp + ".i", 0);
          if (const json* v = p.get(je, "nu", gp)) nu = p.integer(*v, gp + ".nu", 0);
          if (i < 1 || i > N || nu < 1 ||
              nu > model.pattern_map.local_mode_count(i)) {
            p.fail(gp, "valid (i, nu)",
                   "i=" + std::to_string(i) + " nu=" + std::to_string(nu));
            continue;
          }
          if (const json* v = p.get(je, "K", gp))
            ref.local_gains[i - 1][nu - 1] =
                p.matrix(*v, gp + ".K", model.subsystems[i - 1].m,
                         model.subsystems[i - 1].n);
          seen[i - 1][nu - 1] = true;
        }
      for (int i = 1; i <= N; ++i)
        for (int nu = 1; nu <= model.pattern_map.local_mode_count(i); ++nu)
          if (!seen[i - 1][nu - 1])
            p.fail("reference_gains.local", "entry for every (i, nu)",
                   "missing i=" + std::to_string(i) + " nu=" + std::to_string(nu));
    }
    if (const json* jb = p.get(*jr, "beta_u", "reference_gains", false)) {
      const Eigen::MatrixXd B = p.matrix(*jb, "reference_gains.beta_u", N, M);
      ref.beta_u.assign(N, std::vector<double>(M));
      for (int i = 0; i < N; ++i)
        for (int mu = 0; mu < M; ++mu) ref.beta_u[i][mu] = B(i, mu);
    }
  }
  p.done(origin);

  return RunConfig{schema_version, std::move(model), solver, std::move(sim),
                   std::move(ref)};
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

nlohmann::json config_to_json(const RunConfig& config) {
  json j;
  j["schema_version"] = config.schema_version;

  json jm;
  jm["patterns"] = config.model.pattern_map.patterns();
  jm["Q"] = matrix_to_json(config.model.Q.Q);
  jm["gamma"] = config.model.gamma;
  jm["eta0"] = config.model.eta0;
  json subs = json::array();
  for (int i = 1; i <= config.model.subsystem_count(); ++i) {
    const auto& s = config.model.subsystems[i - 1];
    json js;
    js["n"] = s.n;
    js["m"] = s.m;
    auto fam = [&](const char* name, const std::vector<Eigen::MatrixXd>& v) {
      json a = json::array();
      for (const auto& M : v) a.push_back(matrix_to_json(M));
      js[name] = std::move(a);
    };
    fam("A", s.A);
    fam("B", s.B);
    fam("C", s.C);
    fam("D", s.D);
    fam("E", s.E);
    fam("F", s.F);
    fam("G", s.G);
    fam("H", s.H);
    js["x0"] = vector_to_json(config.model.x0[i - 1]);
    js["S_bar"] = matrix_to_json(config.model.budgets[i - 1].S_bar);
    js["S_tilde"] = matrix_to_json(config.model.budgets[i - 1].S_tilde);
    subs.push_back(std::move(js));
  }
  jm["subsystems"] = std::move(subs);
  j["model"] = std::move(jm);

  json jo;
  jo["max_iters"] = config.solver.max_iters;
  jo["residual_tol"] = config.solver.residual_tol;
  jo["stall_window"] = config.solver.stall_window;
  jo["restarts"] = config.solver.restarts;
  jo["seed"] = config.solver.seed;
  jo["epsilon"] = config.solver.epsilon;
  jo["threads"] = config.solver.threads;
  jo["acceleration"] =
      config.solver.accel == Accel::Reflected ? "reflected" : "plain";
  j["solver"] = std::move(jo);

  json js;
  js["T"] = config.simulation.T;
  js["dt"] = config.simulation.dt;
  js["n_traj"] = config.simulation.n_traj;
  js["seed"] = config.simulation.seed;
  js["controller"] = config.simulation.controller;
  json jd;
  switch (config.simulation.disturbance.family) {
    case DisturbanceSignal::Family::Zero:
      jd["family"] = "zero";
      break;
    case DisturbanceSignal::Family::ExpDecay:
      jd["family"] = "exp_decay";
      jd["amplitude"] = config.simulation.disturbance.amplitude;
      jd["rate"] = config.simulation.disturbance.rate;
      break;
    case DisturbanceSignal::Family::Sampled:
      jd["family"] = "sampled";
      jd["times"] = config.simulation.disturbance.times;
      jd["values"] = config.simulation.disturbance.values;
      break;
  }
  js["disturbance"] = std::move(jd);
  js["checkpoints"] = config.simulation.checkpoints;
  if (!config.simulation.uncertainty.empty()) {
    json ju = json::array();
    for (const auto& slot : config.simulation.uncertainty) {
      json je;
      if (slot.local) je["local"] = operator_to_json(*slot.local);
      if (slot.inter) je["inter"] = operator_to_json(*slot.inter);
      ju.push_back(std::move(je));
    }
    js["uncertainty"] = std::move(ju);
  }
  j["simulation"] = std::move(js);

  if (config.reference.has_global || config.reference.has_local) {
    json jr;
    if (config.reference.has_global) {
      json jg = json::array();
      for (std::size_t i = 0; i < config.reference.global_gains.size(); ++i)
        for (std::size_t mu = 0; mu < config.reference.global_gains[i].size(); ++mu)
          jg.push_back({{"i", i + 1},
                        {"mu", mu + 1},
                        {"K", matrix_to_json(config.reference.global_gains[i][mu])}});
      jr["global"] = std::move(jg);
    }
    if (config.reference.has_local) {
      json jl = json::array();
      for (std::size_t i = 0; i < config.reference.local_gains.size(); ++i)
        for (std::size_t nu = 0; nu < config.reference.local_gains[i].size(); ++nu)
          jl.push_back({{"i", i + 1},
                        {"nu", nu + 1},
                        {"K", matrix_to_json(config.reference.local_gains[i][nu])}});
      jr["local"] = std::move(jl);
    }
    if (!config.reference.beta_u.empty()) jr["beta_u"] = config.reference.beta_u;
    j["reference_gains"] = std::move(jr);
  }
  return j;
}

std::string canonical_config_dump(const RunConfig& config) {
  return config_to_json(config).dump(2);
}

}  // namespace jumphinf::tools
