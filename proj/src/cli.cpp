#include "fracvar/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "fracvar/assembly.hpp"
#include "fracvar/bubbles.hpp"
#include "fracvar/constants.hpp"
#include "fracvar/error.hpp"
#include "fracvar/ibp.hpp"
#include "fracvar/io.hpp"
#include "fracvar/scaling.hpp"
#include "fracvar/solver.hpp"

namespace fracvar {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Key {
  const char* key;
  const char* flag;
  const char* fallback;
  const char* help;
};

// Flags win over the config file, which wins over these defaults.
const Key kKeys[] = {
    {"params.n", "--n", "2", "dimension (list for constants)"},
    {"params.s", "--s", "0.3", "fractional order (list for constants)"},
    {"params.lambda", "--lambda", "1", "lambda"},
    {"params.lambda_factor", "--lambda-factor", "", "lambda as a multiple of lambda*"},
    {"domain", "--domain", "", "interval:a:b | box:lo:hi | ball:c:r | annulus:c:r1:r2 | unit-ball | unit-box"},
    {"mesh.h", "--h", "0.04", "lattice width"},
    {"mesh.rext", "--rext", "0", "exterior radius (0: 4 diam)"},
    {"solver.starts", "--starts", "5", "multistart count"},
    {"solver.seed", "--seed", "1", "seed"},
    {"solver.grad_tol", "--grad-tol", "1e-9", "constrained gradient tolerance"},
    {"solver.max_iters", "--max-iters", "500", "iteration cap"},
    {"output.dir", "--out", ".", "output directory"},
    {"output.dump_matrices", "--dump-matrices", "false", "also write A and M"},
    {"assembly.check", "--check-invariants", "true", "verify assembly invariants"},
    {"bubble.anchor", "--anchor", "boundary", "boundary | interior"},
    {"bubble.R", "--cutoff-radius", "0", "cutoff radius (0: diam)"},
    {"bubble.profile", "--profile", "smooth", "smooth | quintic"},
    {"bubble.count", "--eps-count", "5", "ladder length"},
    {"bubble.skip", "--eps-skip", "1", "leading rungs left out"},
    {"bubble.fit", "--fit", "true", "fit the power laws"},
    {"bubble.dense_limit", "--dense-limit", "6000", "largest mesh given a dense form"},
    {"scaling.etas", "--etas", "1,0.5,0.25,0.125,0.0625", "eta ladder"},
    {"cherrier.epsilon_c", "--epsilon-c", "0", "epsilon of the inequality (0: half the constant)"},
    {"cherrier.budget", "--budget", "200", "sample budget"},
    {"ibp.levels", "--levels", "8,16,32", "cells per unit length"},
    {"ibp.width", "--width", "0.25", "Gaussian width"},
};

class Config {
 public:
  explicit Config(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  const std::string& str(const std::string& key) const { return values_.at(key); }

  double real(const std::string& key) const {
    const std::vector<double> v = io::parse_list(str(key));
    if (v.size() != 1) throw ValidationError(key + ": expected one number");
    return v[0];
  }

  long integer(const std::string& key) const {
    const double v = real(key);
    if (v != std::floor(v) || std::abs(v) > 1e15) throw ValidationError(key + ": expected an integer");
    return static_cast<long>(v);
  }

  bool flag(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError(key + ": expected true or false");
  }

  json echo() const {
    json out = json::object();
    for (const auto& [k, v] : values_) out[k] = v;
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<double> numbers(const std::string& text) {
  std::vector<double> out;
  std::string t = text;
  for (char& c : t) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(t);
  std::string item;
  while (in >> item) {
    const std::vector<double> v = io::parse_list(item);
    out.push_back(v[0]);
  }
  return out;
}

DomainSpec parse_domain(const std::string& text, int n) {
  if (text.empty()) return parse_domain(n == 1 ? "interval:0:1" : "unit-ball", n);
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, ':')) parts.push_back(part);
  const std::string& kind = parts[0];
  auto dims = [&](const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != n) {
      throw ValidationError("domain '" + text + "': coordinate count does not match n");
    }
    return v;
  };
  if (kind == "unit-ball") {
    if (n == 1) return DomainSpec::interval(-0.5, 0.5);
    const double r = std::pow(n / sphere_measure(n), 1.0 / n);
    return DomainSpec::ball(std::vector<double>(n, 0.0), r);
  }
  if (kind == "unit-box") {
    if (n == 1) return DomainSpec::interval(0.0, 1.0);
    return DomainSpec::box(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));
  }
  if (kind == "interval" && parts.size() == 3) {
    if (n != 1) throw ValidationError("domain: interval needs n = 1");
    return DomainSpec::interval(io::parse_list(parts[1])[0], io::parse_list(parts[2])[0]);
  }
  if (kind == "box" && parts.size() == 3) {
    if (n == 1) return DomainSpec::interval(io::parse_list(parts[1])[0], io::parse_list(parts[2])[0]);
    return DomainSpec::box(dims(numbers(parts[1])), dims(numbers(parts[2])));
  }
  if (kind == "ball" && parts.size() == 3) {
    const std::vector<double> c = dims(numbers(parts[1]));
    const double r = io::parse_list(parts[2])[0];
    if (n == 1) return DomainSpec::interval(c[0] - r, c[0] + r);
    return DomainSpec::ball(c, r);
  }
  if (kind == "annulus" && parts.size() == 4) {
    return DomainSpec::annulus(dims(numbers(parts[1])), io::parse_list(parts[2])[0],
                               io::parse_list(parts[3])[0]);
  }
  throw ValidationError("domain: cannot parse '" + text + "'");
}

struct Context {
  Config cfg;
  std::string subcommand;
  fs::path out;
  json report;
};

ProblemParams params_from(const Config& cfg, const DomainSpec& domain) {
  const long n = cfg.integer("params.n");
  const double s = cfg.real("params.s");
  if (n < 1 || n > 3) throw ValidationError("params.n must be 1, 2 or 3");
  double lambda = cfg.real("params.lambda");
  if (!cfg.str("params.lambda_factor").empty()) {
    // Validate (n, s) before anything is evaluated at them.
    make_params(static_cast<int>(n), s, 1.0);
    const double S = sharp_constant(static_cast<int>(n), s);
    lambda = cfg.real("params.lambda_factor") *
             lambda_star(S, domain.measure(), static_cast<int>(n), s);
  }
  return make_params(static_cast<int>(n), s, lambda);
}

double rext_from(const Config& cfg, const DomainSpec& domain) {
  const double r = cfg.real("mesh.rext");
  return r > 0.0 ? r : 4.0 * domain.diameter();
}

MinimizeOptions solver_from(const Config& cfg) {
  MinimizeOptions o;
  o.starts = static_cast<int>(cfg.integer("solver.starts"));
  if (o.starts < 1) throw ValidationError("solver.starts must be >= 1");
  const long seed = cfg.integer("solver.seed");
  if (seed < 0) throw ValidationError("solver.seed must be >= 0");
  o.seed = static_cast<std::uint64_t>(seed);
  o.grad_tol = cfg.real("solver.grad_tol");
  if (!(o.grad_tol > 0.0)) throw ValidationError("solver.grad_tol must be > 0");
  o.max_iters = static_cast<int>(cfg.integer("solver.max_iters"));
  if (o.max_iters < 0) throw ValidationError("solver.max_iters must be >= 0");
  return o;
}

json params_json(const ProblemParams& p) {
  return json{{"n", p.n},
              {"s", p.s},
              {"lambda", p.lambda},
              {"p", p.p()},
              {"admissible", p.admissible},
              {"discretization_valid", p.discretization_valid},
              {"displayed_regime", p.displayed_regime}};
}

json mesh_json(const Mesh& m) {
  return json{{"domain", m.domain.describe()},
              {"dim", m.dim},
              {"h", m.h},
              {"cells", m.size()},
              {"exterior_nodes", m.exterior_size()},
              {"collar_nodes", m.near_count},
              {"far_nodes", m.exterior_size() - m.near_count},
              {"R_ext", m.R_ext},
              {"domain_measure", m.domain_measure},
              {"exact_measure", m.exact_measure},
              {"diameter", m.diameter}};
}

json vec(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

json diagnostics_json(const FormDiagnostics& d) {
  return json{{"symmetry", d.symmetry},   {"constants", d.constants}, {"min_weight", d.min_weight},
              {"min_probe", d.min_probe}, {"mu_sum", d.mu_sum},       {"mu_min", d.mu_min}};
}

json run_json(const MinimizeReport& r, bool full) {
  json j{{"X_lambda", r.X_lambda},
         {"iterations", r.iterations},
         {"grad_norm", r.grad_norm},
         {"weak_residual", r.weak_residual},
         {"nonconstant", r.nonconstant},
         {"energy_J", r.energy_J},
         {"bound_constant", r.bound_constant},
         {"bound_Shalf", r.bound_Shalf},
         {"below_Shalf", r.X_lambda < r.bound_Shalf},
         {"converged", r.converged},
         {"fallback_steps", r.fallback_steps},
         {"start_index", r.start_index},
         {"init", r.init}};
  if (full) {
    j["minimizer"] = vec(r.minimizer.values);
    j["v0"] = vec(r.v0.values);
    j["trace"] = vec(r.trace);
  }
  return j;
}

void write(const Context& ctx, const std::string& name, const std::string& content) {
  io::atomic_write(ctx.out / name, content);
}

void write_report(Context& ctx) {
  write(ctx, ctx.subcommand + ".json", ctx.report.dump(2) + "\n");
}

std::string field_csv(const Mesh& mesh, const std::vector<double>& values) {
  std::vector<std::string> header{"cell_index"};
  for (int d = 0; d < mesh.dim; ++d) header.push_back("x" + std::to_string(d));
  header.push_back("value");
  io::Csv csv(header);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (int d = 0; d < mesh.dim; ++d) row.push_back(io::fmt(mesh.centroids[i][d]));
    row.push_back(io::fmt(values[i]));
    csv.add(row);
  }
  return csv.str();
}

NonlocalForm assemble_checked(const Context& ctx, const Mesh& mesh, const ProblemParams& params,
                              json& report) {
  AssemblyOptions ao;
  ao.check_invariants = ctx.cfg.flag("assembly.check");
  NonlocalForm form = assemble(mesh, params, ao);
  report["tail_bound"] = form.tail_bound;
  if (ao.check_invariants) report["assembly"] = diagnostics_json(diagnose(form));
  return form;
}

// ---------------------------------------------------------------- commands

int cmd_constants(Context& ctx) {
  const std::vector<double> ns = numbers(ctx.cfg.str("params.n"));
  const std::vector<double> ss = numbers(ctx.cfg.str("params.s"));
  io::Csv csv({"n", "s", "p", "c_ns", "S", "S_half", "L1", "L2", "L3"});
  json rows = json::array();
  for (double nd : ns) {
    if (nd != std::floor(nd) || nd < 1 || nd > 3) throw ValidationError("params.n must be 1, 2 or 3");
    const int n = static_cast<int>(nd);
    for (double s : ss) {
      make_params(n, s, 1.0);
      const ConstantTable t = constant_table(n, s);
      const bool has_L = n > 4.0 * s;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      csv.add(std::vector<double>{double(n), s, t.p, t.c_ns, t.S, t.S_half, has_L ? t.L1 : nan,
                                  has_L ? t.L2 : nan, has_L ? t.L3 : nan});
      json r{{"n", n}, {"s", s}, {"p", t.p}, {"c_ns", t.c_ns}, {"S", t.S}, {"S_half", t.S_half}};
      if (has_L) {
        r["L1"] = t.L1;
        r["L2"] = t.L2;
        r["L3"] = t.L3;
      }
      rows.push_back(r);
    }
  }
  ctx.report["rows"] = rows;
  ctx.report["mesh"] = nullptr;
  ctx.report["tail_bound"] = nullptr;
  write(ctx, "constants.csv", csv.str());
  write_report(ctx);
  std::cout << "constants: " << csv.rows() << " rows\n";
  return 0;
}

int cmd_minimize(Context& ctx) {
  const int n = static_cast<int>(ctx.cfg.integer("params.n"));
  const DomainSpec domain = parse_domain(ctx.cfg.str("domain"), n);
  const ProblemParams params = params_from(ctx.cfg, domain);
  const MinimizeOptions opts = solver_from(ctx.cfg);
  const Mesh mesh = build_mesh(domain, ctx.cfg.real("mesh.h"), rext_from(ctx.cfg, domain));
  ctx.report["params"] = params_json(params);
  ctx.report["mesh"] = mesh_json(mesh);
  const NonlocalForm form = assemble_checked(ctx, mesh, params, ctx.report);
  const MultistartReport ms = minimize_multistart(form, mesh, params, opts);
  json best = run_json(ms.best, true);
  for (auto it = best.begin(); it != best.end(); ++it) ctx.report[it.key()] = it.value();
  ctx.report["S"] = sharp_constant(params.n, params.s);
  ctx.report["lambda_star"] =
      lambda_star(sharp_constant(params.n, params.s), form.domain_measure, params.n, params.s);
  ctx.report["energy_constant_solution"] =
      params.s / params.n * std::pow(params.lambda, params.n / (2.0 * params.s)) * form.domain_measure;
  ctx.report["multistart_spread"] = ms.spread;
  ctx.report["all_converged"] = ms.all_converged;
  json runs = json::array();
  for (const auto& r : ms.runs) runs.push_back(run_json(r, false));
  ctx.report["runs"] = runs;
  write(ctx, "minimizer.csv", field_csv(mesh, ms.best.minimizer.values));
  if (ctx.cfg.flag("output.dump_matrices")) {
    std::string a;
    for (Eigen::Index i = 0; i < form.A.rows(); ++i) {
      for (Eigen::Index j = 0; j < form.A.cols(); ++j) {
        if (j) a += ',';
        a += io::fmt(form.A(i, j));
      }
      a += '\n';
    }
    write(ctx, "matrix_A.csv", a);
    write(ctx, "mass_M.csv", field_csv(mesh, std::vector<double>(form.M.data(), form.M.data() + form.M.size())));
  }
  ctx.report["status"] = ms.best.converged ? "ok" : "not_converged";
  write_report(ctx);
  std::cout << "minimize: X_lambda=" << io::fmt(ms.best.X_lambda)
            << " nonconstant=" << (ms.best.nonconstant ? "true" : "false")
            << " converged=" << (ms.best.converged ? "true" : "false") << "\n";
  return ms.best.converged ? 0 : 3;
}

json fit_json(const AsymptoticFit& f) {
  return json{{"fitted_exponent", f.fitted_exponent},
              {"fitted_coefficient", f.fitted_coefficient},
              {"r2", f.r2},
              {"epsilons", vec(f.epsilons)},
              {"values", vec(f.values)}};
}

int cmd_bubble(Context& ctx) {
  const int n = static_cast<int>(ctx.cfg.integer("params.n"));
  const DomainSpec domain = parse_domain(ctx.cfg.str("domain"), n);
  const ProblemParams params = params_from(ctx.cfg, domain);
  const Mesh mesh = build_mesh(domain, ctx.cfg.real("mesh.h"), rext_from(ctx.cfg, domain));
  ctx.report["params"] = params_json(params);
  ctx.report["mesh"] = mesh_json(mesh);

  BubbleSpec base;
  const std::string anchor = ctx.cfg.str("bubble.anchor");
  if (anchor != "boundary" && anchor != "interior") throw ValidationError("bubble.anchor: boundary or interior");
  base.boundary = anchor == "boundary";
  base.center = base.boundary ? boundary_anchor(mesh) : interior_anchor(mesh);
  const double R = ctx.cfg.real("bubble.R");
  base.R = R > 0.0 ? R : mesh.diameter;
  const std::string profile = ctx.cfg.str("bubble.profile");
  if (profile != "smooth" && profile != "quintic") throw ValidationError("bubble.profile: smooth or quintic");
  base.profile = profile == "smooth" ? CutoffProfile::Smooth : CutoffProfile::Quintic;
  const long count = ctx.cfg.integer("bubble.count");
  const long skip = ctx.cfg.integer("bubble.skip");
  if (count < 1 || skip < 0 || skip >= count) throw ValidationError("bubble ladder: need 0 <= skip < count");
  std::vector<double> eps = default_ladder(base.R, static_cast<int>(count));
  eps.erase(eps.begin(), eps.begin() + skip);

  const bool fit = ctx.cfg.flag("bubble.fit");
  const double S = sharp_constant(params.n, params.s);
  const double S_half = S / std::pow(2.0, 2.0 * params.s / params.n);
  std::vector<BubbleMeasures> measures;
  json fits = nullptr;
  bool accepted = true;
  if (fit) {
    const AsymptoticStudy st = fit_asymptotics(mesh, params, base, eps, false);
    measures = st.rows;
    accepted = st.accepted;
    fits = json{{"seminorm", fit_json(st.seminorm)},
                {"lp1_norm_sq", fit_json(st.lp1)},
                {"l2_norm_sq", fit_json(st.l2)},
                {"seminorm_interior", fit_json(st.seminorm_interior)},
                {"accepted", st.accepted}};
    if (params.n > 4.0 * params.s) {
      const ConstantTable t = constant_table(params.n, params.s);
      fits["targets"] = json{{"seminorm_exponent", (params.n - 2.0 * params.s) / 2.0},
                             {"lp1_exponent", (params.n - 2.0 * params.s) / 2.0},
                             {"l2_exponent", (params.n - 4.0 * params.s) / 2.0},
                             {"L1", t.L1},
                             {"L2", t.L2},
                             {"L3", t.L3}};
    }
  } else {
    BubbleEvaluator ev(mesh, params);
    for (double e : eps) {
      BubbleSpec sp = base;
      sp.epsilon = e;
      measures.push_back(ev.evaluate(sp));
    }
  }

  const bool dense = static_cast<long>(mesh.size()) <= ctx.cfg.integer("bubble.dense_limit");
  std::vector<double> K(eps.size());
  if (dense) {
    const NonlocalForm form = assemble_checked(ctx, mesh, params, ctx.report);
    const std::vector<ProbeRow> rows = bubble_quotient_probe(form, mesh, params, base, eps);
    for (std::size_t k = 0; k < rows.size(); ++k) K[k] = rows[k].K_lambda;
  } else {
    // Zero extension: an upper bound for the eliminated form.
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const BubbleMeasures& m = measures[k];
      K[k] = (m.seminorm + params.lambda * m.l2_norm_sq) / m.lp1_norm_sq;
    }
    ctx.report["tail_bound"] = nullptr;
  }
  io::Csv csv({"epsilon", "seminorm", "lp1_norm_sq", "l2_norm_sq", "K_lambda", "S_half", "margin"});
  json rows = json::array();
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const BubbleMeasures& m = measures[k];
    csv.add(std::vector<double>{m.epsilon, m.seminorm, m.lp1_norm_sq, m.l2_norm_sq, K[k], S_half,
                                S_half - K[k]});
    rows.push_back(json{{"epsilon", m.epsilon},
                        {"seminorm", m.seminorm},
                        {"seminorm_interior", m.seminorm_interior},
                        {"lp1_norm_sq", m.lp1_norm_sq},
                        {"l2_norm_sq", m.l2_norm_sq},
                        {"K_lambda", K[k]},
                        {"margin", S_half - K[k]},
                        {"margin_S", S - K[k]}});
  }
  ctx.report["anchor"] = anchor;
  ctx.report["center"] = vec(std::vector<double>(base.center.begin(), base.center.begin() + n));
  ctx.report["R"] = base.R;
  ctx.report["k_lambda_route"] = dense ? "eliminated_form" : "zero_extension";
  ctx.report["S"] = S;
  ctx.report["S_half"] = S_half;
  ctx.report["rows"] = rows;
  ctx.report["fits"] = fits;
  ctx.report["status"] = accepted ? "ok" : "fit_rejected";
  write(ctx, "bubble_asymptotics.csv", csv.str());
  write_report(ctx);
  std::cout << "bubble-asymptotics: " << eps.size() << " rungs, smallest margin "
            << io::fmt(S_half - K.back()) << (accepted ? "" : ", fit rejected") << "\n";
  return accepted ? 0 : 3;
}

int cmd_scaling(Context& ctx) {
  const int n = static_cast<int>(ctx.cfg.integer("params.n"));
  const DomainSpec domain = parse_domain(ctx.cfg.str("domain"), n);
  const ProblemParams params = params_from(ctx.cfg, domain);
  SweepOptions so;
  so.h = ctx.cfg.real("mesh.h");
  so.R_ext = rext_from(ctx.cfg, domain);
  so.solver = solver_from(ctx.cfg);
  so.assembly.check_invariants = ctx.cfg.flag("assembly.check");
  const std::vector<double> etas = numbers(ctx.cfg.str("scaling.etas"));
  const Mesh mesh = build_mesh(domain, so.h, so.R_ext);
  ctx.report["params"] = params_json(params);
  ctx.report["mesh"] = mesh_json(mesh);
  const ScalingSweepReport r = shrink_sweep(domain, params, etas, so);
  ctx.report["tail_bound"] = r.tail_bound;
  io::Csv csv({"eta", "X_lambda", "X_over_eta_power", "limit_target", "rescaled_distance",
               "multistart_spread", "converged_flag"});
  json rows = json::array();
  for (const ScalingRow& row : r.rows) {
    csv.add(std::vector<std::string>{io::fmt(row.eta), io::fmt(row.X_lambda),
                                     io::fmt(row.X_over_eta_power), io::fmt(r.limit_target),
                                     io::fmt(row.rescaled_distance), io::fmt(row.multistart_spread),
                                     row.converged ? "1" : "0"});
    rows.push_back(json{{"eta", row.eta},
                        {"cells", row.cells},
                        {"X_lambda", row.X_lambda},
                        {"X_over_eta_power", row.X_over_eta_power},
                        {"rescaled_distance", row.rescaled_distance},
                        {"rescaled_seminorm", row.rescaled_seminorm},
                        {"multistart_spread", row.multistart_spread},
                        {"minimizer_norm", row.minimizer_norm},
                        {"nonconstant", row.nonconstant},
                        {"converged", row.converged}});
  }
  ctx.report["etas"] = vec(r.etas);
  ctx.report["limit_target"] = r.limit_target;
  ctx.report["domain_measure"] = r.domain_measure;
  ctx.report["rows"] = rows;
  ctx.report["all_converged"] = r.all_converged;
  ctx.report["status"] = r.all_converged ? "ok" : "not_converged";
  write(ctx, "scaling_study.csv", csv.str());
  write_report(ctx);
  std::cout << "scaling-study: " << r.rows.size() << " rows, last ratio "
            << io::fmt(r.rows.back().X_over_eta_power / r.limit_target)
            << (r.all_converged ? "" : ", some rows not converged") << "\n";
  return r.all_converged ? 0 : 3;
}

int cmd_cherrier(Context& ctx) {
  const int n = static_cast<int>(ctx.cfg.integer("params.n"));
  const DomainSpec domain = parse_domain(ctx.cfg.str("domain"), n);
  const ProblemParams params = params_from(ctx.cfg, domain);
  const Mesh mesh = build_mesh(domain, ctx.cfg.real("mesh.h"), rext_from(ctx.cfg, domain));
  ctx.report["params"] = params_json(params);
  ctx.report["mesh"] = mesh_json(mesh);
  const NonlocalForm form = assemble_checked(ctx, mesh, params, ctx.report);
  const double S = sharp_constant(params.n, params.s);
  double eps_c = ctx.cfg.real("cherrier.epsilon_c");
  if (eps_c == 0.0) eps_c = 0.5 * std::pow(2.0, 2.0 * params.s / params.n) / S;
  CherrierOptions co;
  co.budget = static_cast<int>(ctx.cfg.integer("cherrier.budget"));
  const long seed = ctx.cfg.integer("solver.seed");
  if (seed < 0) throw ValidationError("solver.seed must be >= 0");
  co.seed = static_cast<std::uint64_t>(seed);
  const CherrierProbeReport r = cherrier_probe(form, mesh, params, eps_c, co);
  io::Csv csv({"sample", "worst_A"});
  for (std::size_t k = 0; k < r.history.size(); ++k) {
    csv.add(std::vector<std::string>{std::to_string(k), io::fmt(r.history[k])});
  }
  ctx.report["epsilon_c"] = r.epsilon_c;
  ctx.report["samples"] = r.samples;
  ctx.report["worst_A"] = r.worst_A;
  ctx.report["constant_bound"] = r.constant_bound;
  ctx.report["late_change"] = r.late_change;
  ctx.report["stagnated"] = r.stagnated;
  ctx.report["status"] = "ok";
  write(ctx, "cherrier_history.csv", csv.str());
  write(ctx, "cherrier_maximizer.csv", field_csv(mesh, r.maximizer_snapshot.values));
  write_report(ctx);
  std::cout << "cherrier-probe: worst_A=" << io::fmt(r.worst_A)
            << " stagnated=" << (r.stagnated ? "true" : "false") << "\n";
  return 0;
}

int cmd_ibp(Context& ctx) {
  const int n = static_cast<int>(ctx.cfg.integer("params.n"));
  const std::string dtext = ctx.cfg.str("domain").empty() ? "unit-box" : ctx.cfg.str("domain");
  const DomainSpec domain = parse_domain(dtext, n);
  const ProblemParams params = params_from(ctx.cfg, domain);
  const double R_ext = rext_from(ctx.cfg, domain);
  std::vector<double> hs;
  for (double k : numbers(ctx.cfg.str("ibp.levels"))) {
    if (!(k >= 1.0)) throw ValidationError("ibp.levels: cells per unit length must be >= 1");
    hs.push_back(1.0 / k);
  }
  GaussianPair gp;
  gp.width = ctx.cfg.real("ibp.width");
  if (!(gp.width > 0.0)) throw ValidationError("ibp.width must be > 0");
  // Two off-centre Gaussians so that neither pair term vanishes by symmetry.
  const Point c = domain.centroid();
  Point lo, hi;
  domain.bounds(lo, hi);
  for (int d = 0; d < n; ++d) {
    const double span = hi[d] - lo[d];
    gp.v_center[d] = c[d] - 0.05 * span;
    gp.w_center[d] = c[d] + (d % 2 ? -0.1 : 0.1) * span;
  }
  const Mesh first = build_mesh(domain, hs.front(), R_ext);
  ctx.report["params"] = params_json(params);
  ctx.report["mesh"] = mesh_json(first);
  const std::vector<IbpLevel> levels = ibp_refinement(domain, params, hs, R_ext, gp);
  io::Csv csv({"h", "cells", "lhs", "bilinear", "neumann_term", "residual", "relative_residual",
               "neumann_reconstructed"});
  json rows = json::array();
  for (const IbpLevel& l : levels) {
    csv.add(std::vector<std::string>{io::fmt(l.h), std::to_string(l.cells), io::fmt(l.report.lhs),
                                     io::fmt(l.report.bilinear), io::fmt(l.report.neumann_term),
                                     io::fmt(l.report.residual), io::fmt(l.relative_residual),
                                     io::fmt(l.neumann_reconstructed)});
    rows.push_back(json{{"h", l.h},
                        {"cells", l.cells},
                        {"lhs", l.report.lhs},
                        {"bilinear", l.report.bilinear},
                        {"neumann_term", l.report.neumann_term},
                        {"residual", l.report.residual},
                        {"relative_residual", l.relative_residual},
                        {"neumann_reconstructed", l.neumann_reconstructed}});
  }
  ctx.report["tail_bound"] = assemble(first, params, AssemblyOptions{true, false, 2}).tail_bound;
  ctx.report["rows"] = rows;
  ctx.report["status"] = "ok";
  write(ctx, "ibp_check.csv", csv.str());
  write_report(ctx);
  std::cout << "ibp-check: " << levels.size() << " levels, final relative residual "
            << io::fmt(levels.back().relative_residual) << "\n";
  return 0;
}

json error_record(const char* kind, const std::string& message) {
  return json{{"kind", kind}, {"message", message}};
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Variational toolkit for the fractional Neumann problem"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> flags;
  std::map<std::string, std::string> storage;
  std::vector<CLI::App*> subs;
  const char* names[] = {"constants", "minimize", "bubble-asymptotics", "scaling-study",
                         "cherrier-probe", "ibp-check"};
  const char* help[] = {"table of sharp and asymptotic constants",
                        "multistart minimization of the quotient",
                        "bubble norms, power-law fits and the quotient probe",
                        "contracting-domain sweep",
                        "adversarial search for the remainder constant",
                        "integration-by-parts refinement study"};
  for (int k = 0; k < 6; ++k) {
    CLI::App* sub = app.add_subcommand(names[k], help[k]);
    sub->set_help_flag("--help", "print this help");
    sub->add_option("--config", config_path, "key = value file");
    for (const Key& key : kKeys) {
      sub->add_option(key.flag, storage[key.key], key.help);
    }
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << json{{"status", "error"}, {"error", error_record("validation", e.what())}}.dump()
              << "\n";
    return 2;
  }
  std::string subcommand;
  CLI::App* active = nullptr;
  for (int k = 0; k < 6; ++k) {
    if (subs[k]->parsed()) {
      subcommand = names[k];
      active = subs[k];
    }
  }

  Context* ctx_ptr = nullptr;
  std::optional<Context> ctx;
  try {
    std::map<std::string, std::string> values;
    for (const Key& key : kKeys) values[key.key] = key.fallback;
    if (!config_path.empty()) {
      for (const auto& [k, v] : io::read_config(config_path)) {
        if (!values.count(k)) throw ValidationError("config: unknown key " + k);
        values[k] = v;
      }
    }
    for (const Key& key : kKeys) {
      if (active->count(key.flag) > 0) values[key.key] = storage[key.key];
    }
    ctx.emplace(Context{Config(values), subcommand, fs::path(values["output.dir"]), json::object()});
    ctx_ptr = &*ctx;
    ctx->report["version"] = kVersion;
    ctx->report["subcommand"] = subcommand;
    ctx->report["config"] = ctx->cfg.echo();
    ctx->report["status"] = "running";
    ctx->report["error"] = nullptr;
    // Validate everything a command needs before the first output.

    {
      const Config& cfg = ctx->cfg;
      if (subcommand != "constants") {
        const int n = static_cast<int>(cfg.integer("params.n"));
        if (n < 1 || n > 3) throw ValidationError("params.n must be 1, 2 or 3");
        make_params(n, cfg.real("params.s"), cfg.real("params.lambda"));
        const DomainSpec d = parse_domain(cfg.str("domain"), n);
        params_from(cfg, d);
        if (!(cfg.real("mesh.h") > 0.0)) throw ValidationError("mesh.h must be > 0");
        solver_from(cfg);
        cfg.flag("assembly.check");
        cfg.flag("output.dump_matrices");
      }
    }
    fs::create_directories(ctx->out);
    if (subcommand == "constants") return cmd_constants(*ctx);
    if (subcommand == "minimize") return cmd_minimize(*ctx);
    if (subcommand == "bubble-asymptotics") return cmd_bubble(*ctx);
    if (subcommand == "scaling-study") return cmd_scaling(*ctx);
    if (subcommand == "cherrier-probe") return cmd_cherrier(*ctx);
    return cmd_ibp(*ctx);
  } catch (const ValidationError& e) {
    // Validation failures leave no files behind; the record goes to stderr.
    std::cerr << json{{"version", kVersion},
                      {"subcommand", subcommand},
                      {"status", "error"},
                      {"error", error_record("validation", e.what())}}
                     .dump()
              << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    if (ctx_ptr) {
      ctx_ptr->report["status"] = "error";
      ctx_ptr->report["error"] = error_record("invariant", e.what());
      try {
        write_report(*ctx_ptr);
      } catch (...) {
      }
    }
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    if (ctx_ptr) {
      ctx_ptr->report["status"] = "error";
      ctx_ptr->report["error"] = error_record("numerical", e.what());
      try {
        write_report(*ctx_ptr);
      } catch (...) {
      }
    }
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    if (ctx_ptr) {
      ctx_ptr->report["status"] = "error";
      ctx_ptr->report["error"] = error_record("internal", e.what());
      try {
        write_report(*ctx_ptr);
      } catch (...) {
      }
    }
    return 4;
  }
}

}  // namespace fracvar
