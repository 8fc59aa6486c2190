// Experiment configs, sweeps, accuracy studies and CSV output.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghostmg/assembly.hpp"
#include "ghostmg/geometry.hpp"
#include "ghostmg/multigrid.hpp"
#include "ghostmg/stabilization.hpp"

namespace ghostmg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Study { Convergence, Accuracy };

struct ExperimentConfig {
  std::string experiment = "experiment";
  int dimension = 0;  // 0: taken from the domain
  std::string domain;
  Params params;
  std::vector<std::size_t> grid_n;
  std::vector<double> theta1;
  std::vector<double> theta2;
  std::vector<double> theta;
  StabilizationMode stabilization = StabilizationMode::Local;
  double beta = 1.0;
  bool eig_everywhere = false;
  std::vector<double> gamma;
  std::vector<int> eta{0};
  int nu1 = 2;
  int nu2 = 1;
  std::vector<std::string> cycle{"two_grid"};
  std::size_t coarsest_n = 8;
  std::size_t iterations = 0;
  std::size_t window_first = 0;
  std::size_t window_last = 0;
  double alpha = 0.0;
  SmootherKind smoother = SmootherKind::GaussSeidel;
  double omega = 2.0 / 3.0;
  Study study = Study::Convergence;
  std::string solution = "sin_sin";
  double target_residual = 0.0;
  std::string output;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': not a number: '" + s + "'");
  }
}

inline long long to_int(const std::string& key, const std::string& s) {
  const double v = to_double(key, s);
  if (v != std::floor(v)) throw ConfigError("'" + key + "': not an integer: '" + s + "'");
  return static_cast<long long>(v);
}

inline std::vector<double> doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
  if (out.empty()) throw ConfigError("'" + key + "': empty list");
  return out;
}

inline std::size_t count(const std::string& key, const std::string& s) {
  const long long v = to_int(key, s);
  if (v < 0) throw ConfigError("'" + key + "': must be nonnegative");
  return static_cast<std::size_t>(v);
}

inline bool domain_known(const std::string& name) {
  for (const auto& e : domain_catalog_entries())
    if (e.name == name) return true;
  return false;
}

inline int domain_dim(const std::string& name) {
  for (const auto& e : domain_catalog_entries())
    if (e.name == name) return e.dim;
  return 0;
}

}  // namespace detail

/// Parses `key = value` lines; `#` starts a comment; lists are comma
/// separated. Domain parameters use keys `param.<name>`.
inline ExperimentConfig parse_config(const std::string& text) {
  using namespace detail;
  ExperimentConfig c;
  bool have_gamma = false;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "experiment") {
      c.experiment = val;
    } else if (key == "dimension") {
      c.dimension = static_cast<int>(to_int(key, val));
    } else if (key == "domain") {
      c.domain = val;
    } else if (key.rfind("param.", 0) == 0) {
      c.params[key.substr(6)] = to_double(key, val);
    } else if (key == "grid_n") {
      for (const auto& s : split_list(val)) c.grid_n.push_back(count(key, s));
    } else if (key == "theta1") {
      c.theta1 = doubles(key, val);
    } else if (key == "theta2") {
      c.theta2 = doubles(key, val);
    } else if (key == "theta") {
      c.theta = doubles(key, val);
    } else if (key == "stabilization") {
      try {
        c.stabilization = parse_stabilization_mode(val);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "local_method") {
      if (val != "closed_form" && val != "eig") throw ConfigError("local_method: closed_form or eig");
      c.eig_everywhere = val == "eig";
    } else if (key == "beta") {
      c.beta = to_double(key, val);
    } else if (key == "gamma") {
      c.gamma = doubles(key, val);
      have_gamma = true;
    } else if (key == "eta") {
      c.eta.clear();
      for (const auto& s : split_list(val)) c.eta.push_back(static_cast<int>(to_int(key, s)));
    } else if (key == "nu1") {
      c.nu1 = static_cast<int>(to_int(key, val));
    } else if (key == "nu2") {
      c.nu2 = static_cast<int>(to_int(key, val));
    } else if (key == "cycle") {
      c.cycle = split_list(val);
    } else if (key == "coarsest_n") {
      c.coarsest_n = count(key, val);
    } else if (key == "iterations") {
      c.iterations = count(key, val);
    } else if (key == "window") {
      const auto w = split_list(val);
      if (w.size() != 2) throw ConfigError("window: expected 'first, last'");
      c.window_first = count(key, w[0]);
      c.window_last = count(key, w[1]);
    } else if (key == "alpha") {
      c.alpha = to_double(key, val);
    } else if (key == "smoother") {
      if (val == "gauss_seidel") c.smoother = SmootherKind::GaussSeidel;
      else if (val == "weighted_jacobi") c.smoother = SmootherKind::WeightedJacobi;
      else throw ConfigError("smoother: gauss_seidel or weighted_jacobi");
    } else if (key == "omega") {
      c.omega = to_double(key, val);
    } else if (key == "study") {
      if (val == "convergence") c.study = Study::Convergence;
      else if (val == "accuracy") c.study = Study::Accuracy;
      else throw ConfigError("study: convergence or accuracy");
    } else if (key == "solution") {
      c.solution = val;
    } else if (key == "target_residual") {
      c.target_residual = to_double(key, val);
    } else if (key == "output") {
      c.output = val;
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }

  if (c.domain.empty()) throw ConfigError("missing 'domain'");
  if (!domain_known(c.domain)) throw ConfigError("unknown domain '" + c.domain + "'");
  const int ddim = domain_dim(c.domain);
  if (c.dimension == 0) c.dimension = ddim;
  if (c.dimension != ddim) throw ConfigError("dimension does not match domain '" + c.domain + "'");
  if (c.grid_n.empty()) throw ConfigError("missing 'grid_n'");
  for (std::size_t n : c.grid_n)
    if (n < 2 || n % 2 != 0) throw ConfigError("grid_n entries must be even and >= 2");
  const bool one = c.dimension == 1;
  if (!have_gamma) c.gamma = {one ? 1.1 : 2.0};
  if (c.alpha == 0.0) c.alpha = one ? 2.0 : 1.75;
  if (c.study == Study::Convergence) {
    if (c.iterations == 0) c.iterations = one ? 50 : 30;
    if (c.window_first == 0) {
      c.window_first = one ? 41 : 21;
      c.window_last = one ? 50 : 30;
    }
    if (c.window_first < 1 || c.window_last < c.window_first || c.window_last > c.iterations) {
      throw ConfigError("window must lie within 1..iterations");
    }
  } else {
    if (c.iterations == 0) c.iterations = 200;
    if (c.target_residual == 0.0) c.target_residual = 1e-10;
    if (c.solution != "sin_sin" && c.solution != "linear" && c.solution != "zero") {
      throw ConfigError("solution: sin_sin, linear or zero");
    }
  }
  if (c.domain == "interval" && (c.theta1.empty() || c.theta2.empty())) {
    throw ConfigError("domain 'interval' needs theta1 and theta2");
  }
  if (c.domain == "rectangle" && c.theta.empty()) throw ConfigError("domain 'rectangle' needs theta");
  for (const auto& cy : c.cycle)
    if (cy != "two_grid" && cy != "V" && cy != "W") throw ConfigError("cycle: two_grid, V or W");
  for (int e : c.eta)
    if (e < 0) throw ConfigError("eta must be nonnegative");
  if (c.nu1 < 0 || c.nu2 < 0) throw ConfigError("nu1, nu2 must be nonnegative");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

/// One point of a sweep.
struct SweepPoint {
  std::size_t n = 0;
  std::optional<double> theta1;
  std::optional<double> theta2;
  double gamma = 0.0;
  int eta = 0;
  std::string cycle;
};

/// Cartesian product in a fixed order; grid size varies fastest.
inline std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
  std::vector<std::optional<double>> t1s{std::nullopt}, t2s{std::nullopt};
  if (c.domain == "interval") {
    t1s.assign(c.theta1.begin(), c.theta1.end());
    t2s.assign(c.theta2.begin(), c.theta2.end());
  } else if (c.domain == "rectangle") {
    t1s.assign(c.theta.begin(), c.theta.end());
  }
  std::vector<SweepPoint> pts;
  for (const auto& t1 : t1s)
    for (const auto& t2 : t2s)
      for (double g : c.gamma)
        for (int e : c.eta)
          for (const auto& cy : c.cycle)
            for (std::size_t n : c.grid_n) pts.push_back({n, t1, t2, g, e, cy});
  return pts;
}

struct ResultRow {
  std::string experiment;
  std::string domain;
  int dim = 0;
  std::size_t n = 0;
  double h = 0.0;
  std::optional<double> theta1;
  std::optional<double> theta2;
  double gamma = 0.0;
  int eta = 0;
  std::string cycle;
  std::string lambda_mode;
  double rho_mean = std::numeric_limits<double>::quiet_NaN();
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  std::size_t iters = 0;
  double wall_ms = 0.0;
  bool diverged = false;
  std::string error;
};

/// Domain for one sweep point (h-dependent catalog entries get h = extent/n).
inline Domain point_domain(const ExperimentConfig& c, const SweepPoint& p) {
  Params prm = c.params;
  if (c.domain == "interval") {
    prm["theta1"] = *p.theta1;
    prm["theta2"] = *p.theta2;
    prm["h"] = 1.0 / static_cast<double>(p.n);
  } else if (c.domain == "rectangle") {
    prm["theta"] = *p.theta1;
    prm["h"] = 1.0 / static_cast<double>(p.n);
  }
  return make_domain(c.domain, prm);
}

inline CycleConfig cycle_config(const ExperimentConfig& c, const SweepPoint& p) {
  CycleConfig cc;
  cc.nu1 = c.nu1;
  cc.nu2 = c.nu2;
  cc.eta = p.eta;
  cc.smoother = c.smoother;
  cc.omega = c.omega;
  if (p.cycle == "two_grid") {
    cc.coarsest_n = 0;
  } else {
    cc.gamma_star = p.cycle == "W" ? 2 : 1;
    cc.coarsest_n = c.coarsest_n;
  }
  return cc;
}

/// Discretization, stabilization, system and hierarchy for one point.
struct PointSetup {
  Domain domain;
  Discretization disc;
  std::vector<CutCellStabilization> stab;
  AssembledSystem sys;
};

inline PointSetup setup_point(const ExperimentConfig& c, const SweepPoint& p,
                              const std::function<ProblemSpec(Domain)>& make_spec) {
  Domain d = point_domain(c, p);
  CartesianGrid grid(d.dim, p.n, d.box_origin, d.box_extent);
  Discretization disc = discretize(grid, d, c.alpha);
  StabilizationConfig sc{c.stabilization, p.gamma, c.beta, c.eig_everywhere};
  auto st = stabilize(disc, sc);
  ProblemSpec spec = make_spec(d);
  AssembledSystem sys = assemble(disc, spec, lambdas_of(st));
  return PointSetup{std::move(d), std::move(disc), std::move(st), std::move(sys)};
}

/// Homogeneous problem from u⁰ = 1 on free DOFs; ρ averaged over the window.
inline ResultRow run_point(const ExperimentConfig& c, const SweepPoint& p) {
  ResultRow row;
  row.experiment = c.experiment;
  row.domain = c.domain;
  row.dim = c.dimension;
  row.n = p.n;
  row.theta1 = p.theta1;
  row.theta2 = p.theta2;
  row.gamma = p.gamma;
  row.eta = p.eta;
  row.cycle = p.cycle;
  row.lambda_mode = to_string(c.stabilization);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    PointSetup s = setup_point(c, p, [](Domain d) { return homogeneous_problem(std::move(d)); });
    row.h = s.disc.grid.h();
    const MgHierarchy H = build_hierarchy(s.sys, s.disc, s.domain, c.alpha, cycle_config(c, p));
    Vector u(s.sys.size(), 0.0);
    for (std::size_t i : s.sys.free_dofs) u[i] = 1.0;
    const SolveResult r = solve(H, s.sys.F, std::move(u), c.iterations);
    row.rho_mean = r.trace.rho_mean(c.window_first, c.window_last);
    row.final_residual = r.trace.residual_norms.back();
    row.iters = r.trace.rho.size();
    row.diverged = r.trace.diverged;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

inline std::vector<ResultRow> run_experiment(const ExperimentConfig& c) {
  std::vector<ResultRow> rows;
  for (const auto& p : sweep_points(c)) rows.push_back(run_point(c, p));
  return rows;
}

// ---------------------------------------------------------------------------
// Accuracy

struct ManufacturedSolution {
  std::function<double(const Point&)> u;
  std::function<Point(const Point&)> grad;
  std::function<double(const Point&)> f;  // −Δu
};

inline ManufacturedSolution manufactured(const std::string& name, int dim) {
  using std::numbers::pi;
  if (name == "zero") {
    return {[](const Point&) { return 0.0; }, [](const Point&) { return Point{0.0, 0.0}; },
            [](const Point&) { return 0.0; }};
  }
  if (name == "linear") {
    if (dim == 1) {
      return {[](const Point& x) { return 1.0 + 2.0 * x[0]; }, [](const Point&) { return Point{2.0, 0.0}; },
              [](const Point&) { return 0.0; }};
    }
    return {[](const Point& x) { return 1.0 + 2.0 * x[0] + 3.0 * x[1]; },
            [](const Point&) { return Point{2.0, 3.0}; }, [](const Point&) { return 0.0; }};
  }
  if (name == "sin_sin") {
    if (dim == 1) {
      return {[](const Point& x) { return std::sin(pi * x[0]); },
              [](const Point& x) { return Point{pi * std::cos(pi * x[0]), 0.0}; },
              [](const Point& x) { return pi * pi * std::sin(pi * x[0]); }};
    }
    return {[](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); },
            [](const Point& x) {
              return Point{pi * std::cos(pi * x[0]) * std::sin(pi * x[1]),
                           pi * std::sin(pi * x[0]) * std::cos(pi * x[1])};
            },
            [](const Point& x) { return 2.0 * pi * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]); }};
  }
  throw std::invalid_argument("unknown manufactured solution '" + name + "'");
}

inline ProblemSpec manufactured_problem(Domain d, const ManufacturedSolution& m) {
  return ProblemSpec{std::move(d), m.f, m.u,
                     [g = m.grad](const Point& x, const Point& n) { return dot(g(x), n); }};
}

struct AccuracyRow {
  std::string experiment;
  std::string domain;
  int dim = 0;
  std::size_t n = 0;
  double h = 0.0;
  double linf_error = std::numeric_limits<double>::quiet_NaN();
  double l2_error = std::numeric_limits<double>::quiet_NaN();
  double linf_ratio = std::numeric_limits<double>::quiet_NaN();
  double l2_ratio = std::numeric_limits<double>::quiet_NaN();
  std::size_t iters = 0;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  std::string error;
};

/// Solves the manufactured problem on each grid (first sweep point values
/// for θ, γ, η, cycle) and measures nodal errors at free nodes inside Ω.
inline std::vector<AccuracyRow> run_accuracy_study(const ExperimentConfig& c) {
  std::vector<AccuracyRow> rows;
  const ManufacturedSolution m = manufactured(c.solution, c.dimension);
  SweepPoint base = sweep_points(c).front();
  for (std::size_t n : c.grid_n) {
    AccuracyRow row{c.experiment, c.domain, c.dimension, n};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      SweepPoint p = base;
      p.n = n;
      PointSetup s = setup_point(c, p, [&](Domain d) { return manufactured_problem(std::move(d), m); });
      row.h = s.disc.grid.h();
      const MgHierarchy H = build_hierarchy(s.sys, s.disc, s.domain, c.alpha, cycle_config(c, p));
      Vector u0(s.sys.size(), 0.0);
      for (std::size_t i = 0; i < u0.size(); ++i)
        if (s.sys.strong[i]) u0[i] = s.sys.F[i];
      const SolveResult r = solve(H, s.sys.F, std::move(u0), c.iterations, c.target_residual);
      row.iters = r.trace.rho.size();
      row.final_residual = r.trace.residual_norms.back();
      double linf = 0.0, l2 = 0.0;
      for (std::size_t i : s.sys.free_dofs) {
        const Point x = s.disc.grid.node(i);
        if (!(s.disc.field.psi[i] < 0.0)) continue;
        const double e = std::abs(r.u[i] - m.u(x));
        linf = std::max(linf, e);
        l2 += e * e;
      }
      row.linf_error = linf;
      row.l2_error = std::sqrt(l2 * std::pow(row.h, c.dimension));
      if (!rows.empty() && rows.back().error.empty()) {
        row.linf_ratio = rows.back().linf_error / row.linf_error;
        row.l2_ratio = rows.back().l2_error / row.l2_error;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kResultHeader =
    "experiment,domain,dim,n,h,theta1,theta2,gamma,eta,cycle,lambda_mode,rho_mean,final_residual,iters,wall_ms";
inline constexpr const char* kAccuracyHeader =
    "experiment,domain,dim,n,h,linf_error,l2_error,linf_ratio,l2_ratio,iters,final_residual,wall_ms";

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string(); }

inline std::string csv_line(const ResultRow& r) {
  std::ostringstream o;
  o << r.experiment << ',' << r.domain << ',' << r.dim << ',' << r.n << ',' << fmt_num(r.h) << ','
    << fmt_opt(r.theta1) << ',' << fmt_opt(r.theta2) << ',' << fmt_num(r.gamma) << ',' << r.eta << ','
    << r.cycle << ',' << r.lambda_mode << ',' << fmt_num(r.rho_mean) << ',' << fmt_num(r.final_residual)
    << ',' << r.iters << ',' << fmt_num(r.wall_ms);
  return o.str();
}

inline std::string csv_line(const AccuracyRow& r) {
  std::ostringstream o;
  o << r.experiment << ',' << r.domain << ',' << r.dim << ',' << r.n << ',' << fmt_num(r.h) << ','
    << fmt_num(r.linf_error) << ',' << fmt_num(r.l2_error) << ',' << fmt_num(r.linf_ratio) << ','
    << fmt_num(r.l2_ratio) << ',' << r.iters << ',' << fmt_num(r.final_residual) << ',' << fmt_num(r.wall_ms);
  return o.str();
}

template <class Row>
void write_csv(std::ostream& out, const char* header, const std::vector<Row>& rows) {
  out << header << '\n';
  for (const auto& r : rows) out << csv_line(r) << '\n';
}

inline void emit_results(const std::vector<ResultRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_results: no rows");
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(f, kResultHeader, rows);
  if (!f) throw std::runtime_error("error writing '" + path + "'");
}

inline void emit_results(const std::vector<AccuracyRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_results: no rows");
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(f, kAccuracyHeader, rows);
  if (!f) throw std::runtime_error("error writing '" + path + "'");
}

/// Splits one CSV line (no quoting is ever produced).
inline std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace ghostmg
