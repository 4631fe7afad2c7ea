// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lmem/experiments.hpp"

using namespace lmem;
using nlohmann::json;

namespace {

constexpr double kEntrywiseTol = 1e-12;     // criteria 1, 2, 3, 5, 9
constexpr double kImagTol = 1e-9;           // criterion 4
constexpr double kTraceTol = 1e-8;          // criterion 4
constexpr double kConstancyTol = 1e-6;      // criteria 6, 7, 8
constexpr double kVariationThreshold = 0.01;  // criteria 6, 7
constexpr double kPurityRelErr = 0.05;      // criterion 10
constexpr double kPhysicalityTol = 1e-8;    // criterion 11
constexpr double kOracleRuntime = 60.0;     // criterion 1, seconds
constexpr double kFig3aRuntime = 300.0;     // criterion 6, seconds

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", x);
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PhysicalityTracker g_physicality;  // every trajectory sample of criteria 6, 7, 8, 10

void absorb(const PhysicalityTracker& t) {
  if (t.samples == 0) return;
  const std::size_t total = g_physicality.samples + t.samples;
  g_physicality.add(t.worst);
  g_physicality.samples = total;
}

void require_check(Outcome& o, const ExperimentReport& rep, const std::string& name) {
  const Check* c = rep.find(name);
  if (!c) {
    o.require(false, rep.experiment + ": missing check " + name);
    return;
  }
  o.require(c->passed, rep.experiment + ": " + name + " = " + fmt(c->value) + " " + c->relation + " " + fmt(c->threshold));
}

Eigen::MatrixXcd random_density(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const int d = 1 << n;
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace();
}

ExperimentConfig config(json j) { return ExperimentConfig::from_json(j); }

double stationary_residual(const Superoperator& l, int n, double zeta) {
  OperatorSum s(n);
  s.add(PauliString(n), std::ldexp(1.0, -n));
  s.add(parity_operator(n), zeta * std::ldexp(1.0, -n));
  return (l.matrix * vectorize(s).amplitudes).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------------------------

ExperimentReport g_oracle;

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (int n = 2; n <= 4; ++n) {
    ModelParams p = ModelParams::uniform(n, 1.0, 1.0);
    for (int j = 0; j < n - 1; ++j) p.couplings[j] = 0.7 + 0.25 * j;
    for (int j = 0; j < n; ++j) p.dephasing_rates[j] = 0.3 + 0.2 * j;
    const double d = max_abs_diff(build_liouvillian_thirdq(p).matrix, build_liouvillian_direct(p).matrix);
    o.require(d < kEntrywiseTol, "N=" + std::to_string(n) + " max |thirdq - direct| = " + fmt(d));
  }
  // Random chains through the oracle suite, which also compares against a dense Lindblad build.
  g_oracle = run_oracle_suite(config({{"experiment", "oracle-suite"},
                                      {"model", {{"n_sites", 2}, {"J", 1.0}, {"gamma", 1.0}}},
                                      {"seed", 7},
                                      {"options", {{"n_min", 2}, {"n_max", 4}, {"full_spectrum_max_n", 3}}}}));
  for (int n = 2; n <= 4; ++n) {
    require_check(o, g_oracle, "thirdq_vs_direct_N" + std::to_string(n));
    require_check(o, g_oracle, "direct_vs_dense_lindblad_N" + std::to_string(n));
  }
  const double s = seconds_since(t0);
  o.require(s < kOracleRuntime, "runtime " + fmt(s) + " s < " + fmt(kOracleRuntime) + " s");
  return o;
}

Outcome criterion2() {
  Outcome o;
  for (int n = 2; n <= 3; ++n) {
    const std::string tag = "_N" + std::to_string(n);
    require_check(o, g_oracle, "commutator_L_Pj" + tag);
    require_check(o, g_oracle, "commutator_L_edge_kappas" + tag);
    require_check(o, g_oracle, "kappa_clifford_algebra" + tag);
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  require_check(o, g_oracle, "kitaev_reconstruction_N3");
  const ModelParams p = ModelParams::uniform(3, 2.0, 1.0);
  const auto l = build_liouvillian_thirdq(p);
  for (const auto& label : all_sector_labels(3)) {
    const double d = (kitaev_form_reconstruction(label, p) - restrict_liouvillian(l, label).matrix).cwiseAbs().maxCoeff();
    o.require(d < kEntrywiseTol, "J=2, gamma=1, sector " + label.to_string() + ": " + fmt(d));
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  for (int n = 2; n <= 3; ++n) {
    const std::string tag = "_N" + std::to_string(n);
    require_check(o, g_oracle, "full_spectrum_unpaired" + tag);
    require_check(o, g_oracle, "full_spectrum_max_imag" + tag);
    require_check(o, g_oracle, "full_spectrum_decaying_trace" + tag);
  }
  const auto census = run_sector_census(config({{"experiment", "sector-census"},
                                                {"model", {{"n_sites", 6}, {"J", 2.0}, {"gamma", 1.0}}},
                                                {"options", {{"imag_tol", kImagTol}, {"trace_tol", kTraceTol}}}}));
  for (const char* c : {"sector_dimensions", "unpaired_eigenvalues", "max_imag", "max_decaying_trace"}) {
    require_check(o, census, c);
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  const std::vector<ModelParams> models = {ModelParams::uniform(2, 1.0, 0.5), ModelParams::uniform(4, 1.3, 0.8),
                                           ModelParams::uniform(6, 2.0, 1.0), ModelParams::uniform(8, 1.0, 1.0)};
  for (const auto& m : models) {
    const auto l = build_liouvillian(m);
    double worst = 0.0;
    for (double z : {-1.0, -0.5, 0.0, 0.5, 1.0}) worst = std::max(worst, stationary_residual(l, m.n_sites, z));
    o.require(worst < kEntrywiseTol, "N=" + std::to_string(m.n_sites) + " max residual over zeta = " + fmt(worst));
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = run_fig3a(config({{"experiment", "fig3a"},
                                     {"model", {{"n_sites", 8}, {"J", 1.0}, {"gamma", 1.0}}},
                                     {"time_grid", {{"t_max", 10.0}, {"n_samples", 101}}},
                                     {"options",
                                      {{"zeta", 0.5},
                                       {"bulk_coefficient", 0.05},
                                       {"constancy_tol", kConstancyTol},
                                       {"variation_threshold", kVariationThreshold}}}}));
  absorb(rep.physicality);
  require_check(o, rep, "product_ratio_constant");
  require_check(o, rep, "product_ratio_value");
  require_check(o, rep, "nonproduct_ratio_varies");
  o.details.push_back("info interior-Z variant of rho0' (z_site=2): max deviation " +
                      fmt(rep.summary["diagnostic"]["max_deviation"].get<double>()));
  const double s = seconds_since(t0);
  o.require(s < kFig3aRuntime, "runtime " + fmt(s) + " s < " + fmt(kFig3aRuntime) + " s");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto rep = run_fig3b(config({{"experiment", "fig3b"},
                                     {"model", {{"n_sites", 8}, {"J", 1.0}, {"gamma", 1.0}}},
                                     {"time_grid", {{"t_max", 10.0}, {"n_samples", 101}}},
                                     {"seed", 20240601},
                                     {"options",
                                      {{"draws", 10},
                                       {"bulk_coefficient", 0.05},
                                       {"constancy_tol", kConstancyTol},
                                       {"variation_threshold", kVariationThreshold}}}}));
  absorb(rep.physicality);
  require_check(o, rep, "u0_all_ratios_constant");
  require_check(o, rep, "u2_all_ratios_vary");
  return o;
}

Outcome criterion8() {
  Outcome o;
  const int n = 6;
  ProductStateSpec mixed;
  mixed.zeta = -0.3;
  mixed.a_terms = {{0.1, PauliString::from_codes("IXXIII")}};
  mixed.b_terms = {{0.1, PauliString::from_codes("ZIIIII")}};
  mixed.c_terms = {{0.1, PauliString::from_codes("ZIIIIZ")}};
  mixed.d_terms = {{0.1, PauliString::from_codes("IIIIIZ")}};
  const std::vector<std::pair<std::string, ProductStateSpec>> specs = {
      {"detection state", detection_state_spec(n, 0.05, 0.5)}, {"four-category state", mixed}};
  const std::vector<std::pair<std::string, ModelParams>> models = {
      {"uniform J=1 gamma=1", ModelParams::uniform(n, 1.0, 1.0)}, {"random u=0 draw", random_perturbed_model(n, 17, 0.0)}};
  EvolveOptions eo;
  eo.store_states = false;
  for (const auto& [sname, spec] : specs) {
    const auto rho0 = build_product_state_vector(spec, n);
    const auto f = edge_factorization_test(rho0);
    o.require(f.factorized, sname + " factorizes initially");
    const double predicted = f.contrast() / (f.a * f.a + f.b * f.b);
    for (const auto& [mname, model] : models) {
      PhysicalityTracker phys;
      double worst = 0.0;
      evolve(rho0, build_liouvillian(model), uniform_grid(10.0 / model.mean_gamma(), 51), eo,
             [&](std::size_t, double, const LiouvilleVector& r) {
               worst = std::max(worst, std::abs(kappa_correlation(r) / purity(r) - predicted));
               phys.add(physicality(r));
             });
      absorb(phys);
      o.require(worst < kConstancyTol, sname + ", " + mname + ": max |corr/purity - (a^2-b^2)/(a^2+b^2)| = " +
                                           fmt(worst) + " (target " + fmt(predicted) + ")");
    }
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  std::mt19937_64 rng(99);
  const auto set = full_pauli_set(3);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto rho = random_density(3, rng);
    worst = std::max(worst, std::abs(purity_from_observables(rho, set) - (rho * rho).trace().real()));
  }
  o.require(worst < kEntrywiseTol, "20 random N=3 states, max |sum <P>^2/2^N - tr rho^2| = " + fmt(worst));
  return o;
}

Outcome criterion10() {
  Outcome o;
  const auto purity_rep = run_fig4_purity(config({{"experiment", "fig4-purity"},
                                                  {"model", {{"n_sites", 6}, {"J", 2.0}, {"gamma", 1.0}}},
                                                  {"time_grid", {{"t_max", 20.0}, {"n_samples", 201}}},
                                                  {"options",
                                                   {{"gammas", {1.0, 2.0, 4.0, 8.0}},
                                                    {"relative_error_threshold", kPurityRelErr}}}}));
  absorb(purity_rep.physicality);
  for (const auto& g : purity_rep.summary["per_gamma"]) {
    const double gamma = g["gamma"].get<double>();
    std::ostringstream name;
    name << "approx_purity_converges_gamma" << gamma;
    require_check(o, purity_rep, name.str());
    o.details.push_back("info gamma=" + fmt(gamma) + ": relative error < 5% for gamma*t >= " +
                        (g["gamma_t_threshold"].is_number() ? fmt(g["gamma_t_threshold"].get<double>()) : "none"));
  }
  const auto spec_rep = run_fig4_spectrum(config({{"experiment", "fig4-spectrum"},
                                                  {"model", {{"n_sites", 6}, {"J", 2.0}, {"gamma", 1.0}}},
                                                  {"sector", "+-+++"},
                                                  {"gamma_scan", {{"gamma_min", 0.5}, {"gamma_max", 4.0}, {"n_points", 36}}}}));
  require_check(o, spec_rep, "block_dimension");
  require_check(o, spec_rep, "defective_rows_present");
  require_check(o, spec_rep, "isolated_pair_ep_at_J");
  return o;
}

Outcome criterion11() {
  Outcome o;
  const auto& w = g_physicality.worst;
  o.require(g_physicality.samples > 0, std::to_string(g_physicality.samples) + " trajectory samples checked");
  o.require(w.trace_error < kPhysicalityTol, "worst |tr rho - 1| = " + fmt(w.trace_error));
  o.require(w.hermiticity_error < kPhysicalityTol, "worst Hermiticity error = " + fmt(w.hermiticity_error));
  o.require(w.min_eigenvalue > -kPhysicalityTol, "lowest eigenvalue = " + fmt(w.min_eigenvalue));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"third-quantized vs direct Liouvillian", criterion1},
      {"symmetry suite", criterion2},
      {"Kitaev reconstruction", criterion3},
      {"spectral structure", criterion4},
      {"stationary family", criterion5},
      {"detection ratio, product vs non-product", criterion6},
      {"random symmetric vs symmetry-breaking draws", criterion7},
      {"correlation/purity link", criterion8},
      {"Pauli purity completeness", criterion9},
      {"purity approximation and exceptional points", criterion10},
      {"trajectory physicality", criterion11},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    failed += !out.pass;
    std::printf("CRITERION %zu %s: %s (%.1f s)\n", k + 1, out.pass ? "PASS" : "FAIL", criteria[k].first,
                seconds_since(t0));
    for (const auto& d : out.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
