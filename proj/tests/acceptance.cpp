// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance <path-to-fracvar-cli> [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fracvar/assembly.hpp"
#include "fracvar/bubbles.hpp"
#include "fracvar/constants.hpp"
#include "fracvar/ibp.hpp"
#include "fracvar/io.hpp"
#include "fracvar/scaling.hpp"
#include "fracvar/solver.hpp"

namespace fs = std::filesystem;
using namespace fracvar;
using io::fmt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr int kN = 2;
constexpr double kS = 0.3;
const double kBallRadius = 1.0 / std::sqrt(std::numbers::pi);  // unit area

DomainSpec unit_ball() { return DomainSpec::ball({0.0, 0.0}, kBallRadius); }

double relerr(double a, double b) { return std::abs(a - b) / std::abs(b); }

double lambda_star_unit() { return lambda_star(sharp_constant(kN, kS), 1.0, kN, kS); }

// Shared minimize runs on the unit-area ball (criteria 6, 7, 8).
struct BallRuns {
  Mesh mesh;
  ProblemParams hi, lo;
  NonlocalForm form_hi, form_lo;
  MultistartReport above, below;
};

const BallRuns& ball_runs() {
  static const BallRuns r = [] {
    BallRuns b;
    const DomainSpec d = unit_ball();
    b.mesh = build_mesh(d, 0.025, 4.0 * d.diameter());
    const double ls = lambda_star_unit();
    b.hi = make_params(kN, kS, 4.0 * ls);
    b.lo = make_params(kN, kS, ls / 100.0);
    b.form_hi = assemble(b.mesh, b.hi);
    b.form_lo = b.form_hi;  // lambda enters only through the solver
    MinimizeOptions o;
    b.above = minimize_multistart(b.form_hi, b.mesh, b.hi, o);
    b.below = minimize_multistart(b.form_lo, b.mesh, b.lo, o);
    return b;
  }();
  return r;
}

const ScalingSweepReport& sweep() {
  static const ScalingSweepReport r = [] {
    SweepOptions o;
    o.h = 0.04;
    return shrink_sweep(unit_ball(), make_params(kN, kS, 4.0 * lambda_star_unit()), default_eta_ladder(), o);
  }();
  return r;
}

Outcome c1() {
  const double a = sharp_constant(2, 0.5);
  const double ea = relerr(a, std::sqrt(std::numbers::pi));
  const BubbleQuotient q1 = bubble_rayleigh_global(2, 0.3);
  const BubbleQuotient q2 = bubble_rayleigh_global(1, 0.25);
  const double e1 = relerr(q1.value, sharp_constant(2, 0.3));
  const double e2 = relerr(q2.value, sharp_constant(1, 0.25));
  return {std::abs(a - std::sqrt(std::numbers::pi)) <= 1e-12 && e1 <= 0.02 && e2 <= 0.02,
          "S(2,1/2) rel err " + fmt(ea) + "; Rayleigh vs S: (2,0.3) " + fmt(e1) + ", (1,0.25) " + fmt(e2)};
}

Outcome c2() {
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    for (double s : {0.25, 0.5, 0.75}) {
      worst = std::max(worst, relerr(normalizing_constant(n, s), normalizing_constant_closed(n, s)));
    }
  }
  const double pi_err = relerr(normalizing_constant(1, 0.5), 1.0 / std::numbers::pi);
  return {worst <= 1e-6 && pi_err <= 1e-6,
          "max rel diff " + fmt(worst) + "; c(1,1/2) vs 1/pi " + fmt(pi_err)};
}

Outcome c3() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double sym = 0.0, ones = 0.0, probe = 0.0, elim = 0.0;
  int failures = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = t < 40 ? 1 + t % 2 : 3;
    const double s = 0.05 + 0.4 * U(rng);
    DomainSpec d;
    const int shape = static_cast<int>(4 * U(rng));
    if (n == 1) {
      const double a = U(rng) - 0.5;
      d = DomainSpec::interval(a, a + 0.5 + U(rng));
    } else if (shape == 0 || n == 3) {
      std::vector<double> lo(n), hi(n);
      for (int k = 0; k < n; ++k) {
        lo[k] = U(rng) - 0.5;
        hi[k] = lo[k] + 0.5 + 0.5 * U(rng);
      }
      d = DomainSpec::box(lo, hi);
    } else if (shape == 3) {
      d = DomainSpec::annulus({U(rng), U(rng)}, 0.2 + 0.1 * U(rng), 0.6 + 0.2 * U(rng));
    } else {
      d = DomainSpec::ball({U(rng) - 0.5, U(rng) - 0.5}, 0.3 + 0.4 * U(rng));
    }
    const double cells = n == 1 ? 20 + 60 * U(rng) : (n == 2 ? 8 + 10 * U(rng) : 4 + 2 * U(rng));
    const double h = d.diameter() / cells;
    AssemblyOptions ao;
    ao.check_invariants = false;
    const Mesh m = build_mesh(d, h, (2.5 + 2.0 * U(rng)) * d.diameter());
    const NonlocalForm f = assemble(m, make_params(n, s, 1.0), ao);
    const FormDiagnostics g = diagnose(f, 20, 1000 + t);
    sym = std::max(sym, g.symmetry);
    ones = std::max(ones, g.constants);
    probe = std::min(probe, g.min_probe);
    Eigen::VectorXd u(static_cast<Eigen::Index>(m.size()));
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = 2.0 * U(rng) - 1.0;
    const DiscreteField r = reconstruct_exterior(f, DiscreteField(std::vector<double>(u.data(), u.data() + u.size())));
    const double base = full_form(f, r);
    for (int k = 0; k < 5; ++k) {
      DiscreteField q = r;
      const double amp = std::pow(10.0, -1.0 - 3.0 * U(rng));
      for (double& v : *q.exterior_values) v += amp * (2.0 * U(rng) - 1.0);
      const double drop = (base - full_form(f, q)) / base;
      elim = std::max(elim, drop);
      if (drop > 1e-12) ++failures;
    }
  }
  const bool ok = sym <= 1e-12 && ones <= 1e-12 && probe >= -1e-10 && failures == 0;
  return {ok, "50 meshes: symmetry " + fmt(sym) + ", A1 " + fmt(ones) + ", min probe " + fmt(probe) +
                  ", worst relative drop under perturbation " + fmt(elim)};
}

Outcome c4() {
  const DomainSpec d = DomainSpec::box({0.0, 0.0}, {1.0, 1.0});
  GaussianPair gp;
  gp.width = 0.25;
  gp.v_center = {0.45, 0.45, 0.0};
  gp.w_center = {0.6, 0.4, 0.0};
  const std::vector<IbpLevel> lv =
      ibp_refinement(d, make_params(kN, kS, 1.0), {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, 4.0 * d.diameter(), gp);
  bool ok = true;
  std::string ratios;
  double neu = 0.0;
  for (std::size_t k = 0; k < lv.size(); ++k) {
    neu = std::max(neu, std::abs(lv[k].neumann_reconstructed));
    if (k == 0) continue;
    const double r = std::abs(lv[k - 1].report.residual) / std::abs(lv[k].report.residual);
    ratios += (k > 1 ? ", " : "") + fmt(r);
    ok = ok && r >= 1.5;
  }
  return {ok && neu <= 1e-10, "residual ratios per halving " + ratios + "; max reconstructed Neumann " + fmt(neu)};
}

Outcome c5() {
  const DomainSpec d = unit_ball();
  const Mesh m = build_mesh(d, 0.05, 4.0 * d.diameter());
  const NonlocalForm f = assemble(m, make_params(kN, kS, 1.0));
  double worst = 0.0;
  for (double lam : {0.5, 1.0, 5.0}) {
    const ProblemParams p = make_params(kN, kS, lam);
    const double ul = std::pow(lam, (kN - 2.0 * kS) / (4.0 * kS));
    worst = std::max(worst, weak_residual(f, p, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m.size()), ul)));
  }
  return {worst <= 1e-10, "max weak residual " + fmt(worst)};
}

Outcome c6() {
  const BallRuns& b = ball_runs();
  const double p = b.hi.p();
  const double meas = b.form_hi.domain_measure;
  double worst = 0.0;
  for (double lam : {b.lo.lambda, 1.0, b.hi.lambda}) {
    const ProblemParams pp = make_params(kN, kS, lam);
    const double bound = lam * std::pow(meas, (p - 1) / (p + 1));
    for (double c : {0.01, 1.0, 30.0}) {
      const double k = k_lambda(b.form_hi, pp, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(b.mesh.size()), c));
      worst = std::max(worst, relerr(k, bound));
    }
  }
  int violations = 0, reports = 0;
  for (const MultistartReport* ms : {&b.above, &b.below}) {
    for (const MinimizeReport& r : ms->runs) {
      ++reports;
      if (r.X_lambda > r.bound_constant * (1 + 1e-12)) ++violations;
    }
  }
  for (const ScalingRow& row : sweep().rows) {
    ++reports;
    if (row.X_over_eta_power > sweep().limit_target * (1 + 1e-12)) ++violations;
  }
  return {worst <= 1e-12 && violations == 0,
          "constant quotient rel err " + fmt(worst) + "; X above bound in " + std::to_string(violations) + "/" +
              std::to_string(reports) + " reports"};
}

Outcome c7() {
  const BallRuns& b = ball_runs();
  const double sn = kS / kN;
  double worst_const = 0.0;
  for (double lam : {0.5, 1.0, 5.0}) {
    const ProblemParams p = make_params(kN, kS, lam);
    const double ul = std::pow(lam, (kN - 2.0 * kS) / (4.0 * kS));
    const double J = j_lambda(b.form_hi, p, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(b.mesh.size()), ul));
    worst_const = std::max(worst_const, relerr(J, sn * std::pow(lam, kN / (2.0 * kS)) * b.form_hi.domain_measure));
  }
  double worst_min = 0.0;
  int converged = 0;
  for (const MultistartReport* ms : {&b.above, &b.below}) {
    const ProblemParams& p = ms == &b.above ? b.hi : b.lo;
    for (const MinimizeReport& r : ms->runs) {
      if (!r.converged) continue;
      ++converged;
      const double J = j_lambda(b.form_hi, p, r.v0);
      worst_min = std::max(worst_min, relerr(J, sn * std::pow(r.X_lambda, kN / (2.0 * kS))));
    }
  }
  return {worst_const <= 1e-10 && worst_min <= 1e-8 && converged > 0,
          "J(u_lambda) rel err " + fmt(worst_const) + "; J(v0) rel err " + fmt(worst_min) + " over " +
              std::to_string(converged) + " converged runs"};
}

Outcome c8() {
  const BallRuns& b = ball_runs();
  const MinimizeReport& best = b.above.best;
  const double S_half = sharp_constant(kN, kS) / std::pow(2.0, 2.0 * kS / kN);
  const double ul_energy = kS / kN * std::pow(b.hi.lambda, kN / (2.0 * kS)) * b.form_hi.domain_measure;
  const double Jv0 = j_lambda(b.form_hi, b.hi, best.v0);
  int constant_runs = 0;
  for (const MinimizeReport& r : b.below.runs) constant_runs += r.converged && !r.nonconstant;
  const bool ok = best.converged && best.nonconstant && best.X_lambda < S_half && Jv0 < ul_energy &&
                  constant_runs == static_cast<int>(b.below.runs.size());
  return {ok, std::to_string(b.mesh.size()) + " cells; lambda=4 lambda*: nonconstant " +
                  (best.nonconstant ? "yes" : "no") + ", X " + fmt(best.X_lambda) + " vs S/2^{2s/n} " +
                  fmt(S_half) + ", J(v0) " + fmt(Jv0) + " vs J(u_lambda) " + fmt(ul_energy) +
                  "; lambda=lambda*/100: " + std::to_string(constant_runs) + "/" +
                  std::to_string(b.below.runs.size()) + " constant"};
}

Outcome c9() {
  const DomainSpec d = DomainSpec::box({-0.5, -0.5}, {0.5, 0.5});
  const Mesh m = build_mesh(d, 1.0 / 256, 4.0 * d.diameter());
  const ProblemParams p = make_params(kN, kS, 1.0);
  BubbleSpec base;
  base.R = 1.0;
  base.center = interior_anchor(m);
  base.boundary = false;
  std::vector<double> eps = default_ladder(base.R, 5);
  eps.erase(eps.begin());
  const AsymptoticStudy st = fit_asymptotics(m, p, base, eps);
  const double e_semi = (kN - 2 * kS) / 2, e_l2 = (kN - 4 * kS) / 2;
  const double r1 = relerr(st.seminorm.fitted_exponent, e_semi);
  const double r2 = relerr(st.lp1.fitted_exponent, e_semi);
  const double r3 = relerr(st.l2.fitted_exponent, e_l2);
  const AsymptoticConstants ac = asymptotic_constants(kN, kS);
  const double r4 = relerr(st.lp1.fitted_coefficient, ac.L2);
  const double S = sharp_constant(kN, kS);
  const double r5 = relerr(ac.L1_quadrature / ac.L2_quadrature, S);
  const bool ok = r1 <= 0.05 && r2 <= 0.05 && r3 <= 0.05 && r4 <= 0.10 && r5 <= 0.02;
  return {ok, "exponents " + fmt(st.seminorm.fitted_exponent) + ", " + fmt(st.lp1.fitted_exponent) + ", " +
                  fmt(st.l2.fitted_exponent) + " (targets " + fmt(e_semi) + ", " + fmt(e_semi) + ", " + fmt(e_l2) +
                  "); L^{p+1} coefficient rel err " + fmt(r4) + "; L1/L2 vs S rel err " + fmt(r5)};
}

Outcome c10() {
  const DomainSpec d = unit_ball();
  const Mesh m = build_mesh(d, 0.025, 4.0 * d.diameter());
  const double S = sharp_constant(kN, kS);
  const double S_half = S / std::pow(2.0, 2.0 * kS / kN);
  std::vector<double> eps;
  for (double e : default_ladder(m.diameter, 6)) {
    if (std::sqrt(e) / 4.0 >= m.h) eps.push_back(e);  // resolved rungs only
  }
  const NonlocalForm f = assemble(m, make_params(kN, kS, 1.0));
  bool ok = !eps.empty();
  std::string detail = "smallest resolved epsilon " + fmt(eps.back()) + ";";
  for (double lam : {1.0, 4.0 * lambda_star_unit()}) {
    const ProblemParams p = make_params(kN, kS, lam);
    BubbleSpec b;
    b.R = m.diameter;
    b.boundary = true;
    b.center = boundary_anchor(m);
    const double kb = bubble_quotient_probe(f, m, p, b, eps).back().K_lambda;
    b.boundary = false;
    b.center = interior_anchor(m);
    const double ki = bubble_quotient_probe(f, m, p, b, eps).back().K_lambda;
    ok = ok && kb < S_half && ki >= S;
    detail += " lambda " + fmt(lam) + ": boundary K " + fmt(kb) + " vs S/2^{2s/n} " + fmt(S_half) +
              ", interior K " + fmt(ki) + " vs S " + fmt(S) + ";";
  }
  detail.pop_back();
  return {ok, detail};
}

Outcome c11() {
  const ProblemParams p = make_params(kN, kS, 1.0);
  const DomainSpec d = unit_ball();
  const double h = 0.08, R = 4.0 * d.diameter();
  const Mesh ref = build_mesh(d, h, R);
  const NonlocalForm fr = assemble(ref, p);
  double semi = 0.0, lp = 0.0;
  for (double eta : {0.5, 0.25}) {
    DomainSpec de = d;
    de.eta = eta;
    const Mesh me = build_mesh(de, eta * h, eta * R);
    const NonlocalForm fe = assemble(me, p);
    const ScalingIdentityReport r = scaling_identity_check(fr, ref, fe, me, p, eta, 20, 7, false);
    semi = std::max(semi, r.seminorm_error);
    lp = std::max(lp, r.lp_error);
  }
  return {semi <= 1e-10 && lp <= 1e-10, "seminorm " + fmt(semi) + ", L^{p+1} " + fmt(lp)};
}

Outcome c12() {
  const ScalingSweepReport& r = sweep();
  int above = 0;
  for (const ScalingRow& row : r.rows) above += row.X_over_eta_power > r.limit_target * (1 + 1e-12);
  const ScalingRow& last = r.rows.back();
  const double gap = relerr(last.X_over_eta_power, r.limit_target);
  const double p = make_params(kN, kS, 1.0).p();
  const double const_norm = std::pow(r.domain_measure, 0.5 - 1.0 / (p + 1));
  const double dist = last.rescaled_distance / const_norm;
  return {above == 0 && gap <= 0.02 && dist <= 1e-2,
          std::to_string(above) + " rows above the limit; last row eta " + fmt(last.eta) + " gap " + fmt(gap) +
              ", relative distance " + fmt(dist)};
}

Outcome c13() {
  const ScalingRow& last = sweep().rows.back();
  const double rel = last.multistart_spread / last.minimizer_norm;
  return {rel <= 1e-6 && last.converged,
          "eta " + fmt(last.eta) + ": relative spread " + fmt(rel) + (last.converged ? "" : ", not all converged")};
}

Outcome c14() {
  const DomainSpec d = unit_ball();
  const Mesh m = build_mesh(d, 0.04, 4.0 * d.diameter());
  const ProblemParams p = make_params(kN, kS, 1.0);
  const NonlocalForm f = assemble(m, p);
  const double e = 0.5 * std::pow(2.0, 2.0 * kS / kN) / sharp_constant(kN, kS);
  const CherrierProbeReport r = cherrier_probe(f, m, p, e, CherrierOptions{});
  return {r.stagnated && r.worst_A >= r.constant_bound,
          std::to_string(r.samples) + " samples: worst_A " + fmt(r.worst_A) + ", late change " +
              fmt(r.late_change) + ", constant bound " + fmt(r.constant_bound)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream f(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

std::string g_cli;

Outcome c15() {
  if (g_cli.empty()) return {false, "no CLI path given"};
  const std::vector<std::string> commands = {
      "constants --n 2 --s 0.3",
      "minimize --lambda-factor 4",
      "bubble-asymptotics --domain box:-0.5,-0.5:0.5,0.5 --h 0.0078125 --cutoff-radius 1 --anchor interior "
      "--eps-count 4",
      "scaling-study --lambda-factor 4 --h 0.05",
      "cherrier-probe",
      "ibp-check"};
  const fs::path dir = fs::temp_directory_path() / "fracvar_acceptance_determinism";
  int identical = 0, files = 0;
  std::string bad;
  for (const std::string& c : commands) {
    std::map<std::string, std::string> runs[2];
    for (auto& run : runs) {
      fs::remove_all(dir);
      fs::create_directories(dir);
      const std::string cmd = "\"" + g_cli + "\" " + c + " --out \"" + dir.string() + "\" > /dev/null 2>&1";
      if (std::system(cmd.c_str()) == -1) return {false, "cannot spawn the CLI"};
      run = snapshot(dir);
    }
    const bool same = !runs[0].empty() && runs[0] == runs[1];
    identical += same;
    files += static_cast<int>(runs[0].size());
    if (!same) bad += " [" + c + "]";
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(commands.size()),
          std::to_string(identical) + "/" + std::to_string(commands.size()) + " commands byte-identical over " +
              std::to_string(files) + " files" + bad};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    if (!a.empty() && std::all_of(a.begin(), a.end(), ::isdigit)) {
      only.insert(std::stoi(a));
    } else {
      g_cli = a;
    }
  }
  const std::vector<std::function<Outcome()>> criteria = {c1, c2,  c3,  c4,  c5,  c6,  c7, c8,
                                                          c9, c10, c11, c12, c13, c14, c15};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2d: %s  %s  (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
