#include "lmem/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "lmem/io.hpp"
#include "lmem/parallel.hpp"

namespace lmem {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPhysicalityTol = 1e-8;

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

// Typed lookup in cfg.options that rejects keys the experiment does not know.
class Options {
 public:
  Options(const json& j, std::set<std::string> allowed, const std::string& experiment) : j_(j) {
    require_keys(j_, allowed, "options of " + experiment);
  }
  template <class T>
  T get(const std::string& key, T fallback) const {
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("option '" + key + "': " + e.what());
    }
  }

 private:
  const json& j_;
};

const std::set<std::string> kEvolveKeys = {"method", "atol", "rtol"};

std::set<std::string> with_evolve_keys(std::set<std::string> keys) {
  keys.insert(kEvolveKeys.begin(), kEvolveKeys.end());
  return keys;
}

EvolveOptions evolve_options(const Options& o) {
  EvolveOptions e;
  e.method = evolution_method_from_string(o.get<std::string>("method", "integrator"));
  e.atol = o.get("atol", e.atol);
  e.rtol = o.get("rtol", e.rtol);
  e.store_states = false;
  return e;
}

json evolve_options_json(const EvolveOptions& e) {
  return {{"method", to_string(e.method)}, {"atol", e.atol}, {"rtol", e.rtol}};
}

Check less_than(std::string name, double value, double threshold) {
  return {std::move(name), value < threshold, value, threshold, "<"};
}

Check greater_than(std::string name, double value, double threshold) {
  return {std::move(name), value > threshold, value, threshold, ">"};
}

double physicality_violation(const PhysicalityReport& r) {
  return std::max({r.trace_error, r.hermiticity_error, -r.min_eigenvalue});
}

void merge(PhysicalityTracker& into, const PhysicalityTracker& from) {
  if (from.samples == 0) return;
  const std::size_t total = into.samples + from.samples;
  into.add(from.worst);
  into.samples = total;
}

Check physicality_check(const PhysicalityTracker& t) {
  const double v = t.samples ? physicality_violation(t.worst) : kInf;
  return less_than("physicality", v, kPhysicalityTol);
}

json physicality_json(const PhysicalityTracker& t) {
  return {{"samples", t.samples},
          {"worst_trace_error", t.worst.trace_error},
          {"worst_hermiticity_error", t.worst.hermiticity_error},
          {"min_eigenvalue", t.worst.min_eigenvalue}};
}

std::filesystem::path out_path(const ExperimentConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.output_dir) / name;
}

void emit(ExperimentReport& rep, const ExperimentConfig& cfg, const std::string& name, const CsvTable& table) {
  if (cfg.output_dir.empty()) return;
  table.write(out_path(cfg, name));
  rep.files.push_back(name);
}

std::string compact(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// Ratio and physicality sampled along one trajectory without keeping the states.
struct RatioRun {
  RatioSeries series;
  std::vector<PhysicalityReport> phys;
  PhysicalityTracker tracker;
  std::string method_tag;
  std::size_t subspace_dim = 0;
};

RatioRun run_ratio(const LiouvilleVector& rho0, const Superoperator& l, const std::vector<double>& times,
                   const EvolveOptions& opts, const OperatorSum& x1, const OperatorSum& x2) {
  RatioRun run;
  const ObservableProbe p1(x1), p2(x2);
  run.series.samples.resize(times.size());
  run.phys.resize(times.size());
  const double guard = ratio_guard(p2(rho0).real());
  const auto res = evolve(rho0, l, times, opts, [&](std::size_t k, double t, const LiouvilleVector& rho) {
    run.series.samples[k] = ratio_sample(p1, p2, t, rho, guard);
    run.phys[k] = physicality(rho);
  });
  for (const auto& r : run.phys) run.tracker.add(r);
  run.method_tag = res.method_tag;
  run.subspace_dim = res.subspace_dim;
  return run;
}

CsvTable ratio_table(const RatioRun& run) {
  CsvTable t({"t", "x1", "x2", "ratio", "guarded", "trace_error", "hermiticity_error", "min_eigenvalue"});
  for (std::size_t k = 0; k < run.series.samples.size(); ++k) {
    const auto& s = run.series.samples[k];
    const auto& p = run.phys[k];
    t.row({format_double(s.t), format_double(s.x1), format_double(s.x2), format_double(s.ratio),
           s.guarded ? "1" : "0", format_double(p.trace_error), format_double(p.hermiticity_error),
           format_double(p.min_eigenvalue)});
  }
  return t;
}

json ratio_json(const RatioRun& run) {
  return {{"max_deviation", run.series.max_deviation()},
          {"initial_ratio", run.series.samples.empty() ? kNaN : run.series.samples.front().ratio},
          {"guarded_samples", run.series.guarded_count()},
          {"method", run.method_tag},
          {"subspace_dim", run.subspace_dim},
          {"physicality", physicality_json(run.tracker)}};
}

double time_unit_gamma(const ModelParams& m) {
  const double g = m.mean_gamma();
  return g > 0.0 ? g : 1.0;
}

ModelParams with_uniform_gamma(ModelParams m, double gamma) {
  std::fill(m.dephasing_rates.begin(), m.dephasing_rates.end(), gamma);
  return m;
}

// Dense reference for L rho = [H, rho] + i sum (L rho L^+ - {L^+ L, rho}/2), column by column.
double direct_vs_dense_deviation(const ModelParams& p, const Superoperator& l) {
  const Eigen::MatrixXcd h = build_hamiltonian(p).to_matrix();
  std::vector<Eigen::MatrixXcd> ls, lsd;
  for (const auto& op : build_dissipators(p)) {
    ls.push_back(op.to_matrix());
    lsd.push_back(ls.back().adjoint() * ls.back());
  }
  const cplx i(0.0, 1.0);
  const Eigen::MatrixXcd dense_l(l.matrix);
  double worst = 0.0;
  for (std::size_t a = 0; a < l.dim(); ++a) {
    const Eigen::MatrixXcd rho = devectorize(LiouvilleVector::basis(p.n_sites, static_cast<LiouvilleIndex>(a)));
    Eigen::MatrixXcd out = h * rho - rho * h;
    for (std::size_t k = 0; k < ls.size(); ++k) {
      out += i * (ls[k] * rho * ls[k].adjoint() - 0.5 * (lsd[k] * rho + rho * lsd[k]));
    }
    const auto col = vectorize(out).amplitudes;
    worst = std::max(worst, (col - dense_l.col(static_cast<Eigen::Index>(a))).cwiseAbs().maxCoeff());
  }
  return worst;
}

double max_abs(const SparseOp& m) {
  double worst = 0.0;
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseOp::InnerIterator it(m, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

double clifford_deviation(int n, KappaConvention conv) {
  std::vector<SparseOp> k;
  for (int a = 1; a <= 4 * n; ++a) k.push_back(kappa_as_liouville_matrix(a, n, conv));
  const SparseOp id = identity_op(n);
  double worst = 0.0;
  for (std::size_t a = 0; a < k.size(); ++a) {
    for (std::size_t b = a; b < k.size(); ++b) {
      SparseOp anti = k[a] * k[b] + k[b] * k[a];
      if (a == b) anti -= 2.0 * id;
      worst = std::max(worst, max_abs(anti));
    }
  }
  return worst;
}

double stationary_residual(const Superoperator& l, int n, double zeta) {
  const double norm = std::ldexp(1.0, -n);
  OperatorSum s(n);
  s.add(PauliString(n), norm);
  s.add(parity_operator(n), zeta * norm);
  const Eigen::VectorXcd v = l.matrix * vectorize(s).amplitudes;
  return v.cwiseAbs().maxCoeff();
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Configuration

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  require_keys(j, {"experiment", "model", "time_grid", "gamma_scan", "sector", "output_dir", "seed", "options"},
               "config");
  ExperimentConfig c;
  try {
    c.experiment = j.at("experiment").get<std::string>();
  } catch (const json::exception&) {
    throw ConfigError("config: 'experiment' (string) is required");
  }
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
    throw ConfigError("config: unknown experiment '" + c.experiment + "'");
  }
  try {
    if (!j.contains("model")) throw ConfigError("config: 'model' is required");
    const json& m = j.at("model");
    if (m.contains("J")) {
      require_keys(m, {"n_sites", "J", "gamma"}, "model shorthand");
      c.model = ModelParams::uniform(m.at("n_sites").get<int>(), m.at("J").get<double>(),
                                     m.value("gamma", 1.0));
    } else {
      c.model = model_from_json(m);
    }
    if (j.contains("time_grid")) {
      const json& t = j.at("time_grid");
      require_keys(t, {"t_max", "n_samples"}, "time_grid");
      c.time_grid.t_max = t.value("t_max", c.time_grid.t_max);
      c.time_grid.n_samples = t.value("n_samples", c.time_grid.n_samples);
    }
    if (j.contains("gamma_scan")) {
      const json& g = j.at("gamma_scan");
      require_keys(g, {"gamma_min", "gamma_max", "n_points"}, "gamma_scan");
      GammaScanConfig s;
      s.gamma_min = g.value("gamma_min", s.gamma_min);
      s.gamma_max = g.value("gamma_max", s.gamma_max);
      s.n_points = g.value("n_points", s.n_points);
      if (!(s.gamma_min < s.gamma_max) || s.n_points < 2) throw ConfigError("gamma_scan: need gamma_min < gamma_max and n_points >= 2");
      c.gamma_scan = s;
    }
    if (j.contains("sector")) c.sector = j.at("sector").get<std::string>();
    c.output_dir = j.value("output_dir", std::string());
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("options")) {
      if (!j.at("options").is_object()) throw ConfigError("options must be an object");
      c.options = j.at("options");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.time_grid.n_samples < 1 || !(c.time_grid.t_max >= 0.0)) throw ConfigError("time_grid: need n_samples >= 1, t_max >= 0");
  if (c.sector) {
    const auto label = SectorLabel::parse(*c.sector);
    if (label.n_sites() != c.model.n_sites) throw ConfigError("sector label length does not match n_sites - 1");
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j = {{"experiment", experiment},
            {"model", model_to_json(model)},
            {"time_grid", {{"t_max", time_grid.t_max}, {"n_samples", time_grid.n_samples}}},
            {"output_dir", output_dir},
            {"seed", seed},
            {"options", options}};
  if (gamma_scan) {
    j["gamma_scan"] = {{"gamma_min", gamma_scan->gamma_min},
                       {"gamma_max", gamma_scan->gamma_max},
                       {"n_points", gamma_scan->n_points}};
  }
  if (sector) j["sector"] = *sector;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json(path);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"fig3a",         "fig3b",         "fig4-purity",
                                                 "fig4-spectrum", "sector-census", "oracle-suite"};
  return names;
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* ExperimentReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

json ExperimentReport::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) {
    cs.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold},
                  {"relation", c.relation}});
  }
  return {{"experiment", experiment}, {"passed", passed()}, {"checks", cs}, {"summary", summary}, {"files", files}};
}

std::vector<double> experiment_times(const ExperimentConfig& cfg) {
  const double g = cfg.model.mean_gamma();
  const double t_max = g > 0.0 ? cfg.time_grid.t_max / g : cfg.time_grid.t_max;
  return uniform_grid(t_max, cfg.time_grid.n_samples);
}

std::vector<std::uint64_t> draw_seeds(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> out(count);
  for (auto& s : out) s = rng();
  return out;
}

// ---------------------------------------------------------------------------------------------
// Detection experiments

ExperimentReport run_fig3a(const ExperimentConfig& cfg) {
  const Options o(cfg.options,
                  with_evolve_keys({"zeta", "bulk_coefficient", "z_site", "diagnostic_z_site", "constancy_tol",
                                    "variation_threshold"}),
                  "fig3a");
  const int n = cfg.model.n_sites;
  if (n % 2 != 0) throw ConfigError("fig3a: n_sites must be even");
  const double zeta = o.get("zeta", 0.5);
  const double coef = o.get("bulk_coefficient", 0.2);
  const int z_site = o.get("z_site", 1);
  const int diag_site = o.get("diagnostic_z_site", 2);
  const double const_tol = o.get("constancy_tol", 1e-6);
  const double var_thr = o.get("variation_threshold", 0.01);
  const EvolveOptions eo = evolve_options(o);

  ExperimentReport rep;
  rep.experiment = cfg.experiment;
  const auto times = experiment_times(cfg);
  const auto l = build_liouvillian(cfg.model);
  const OperatorSum x1 = detection_observable(n);
  const OperatorSum x2 = x1 * OperatorSum(parity_operator(n));

  const auto spec = detection_state_spec(n, coef, zeta);
  const auto rho0 = build_product_state_vector(spec, n);
  const double predicted = predicted_ratio(classify_operator(spec.a_terms.front().op), zeta);
  const auto product = run_ratio(rho0, l, times, eo, x1, x2);
  const auto nonproduct = run_ratio(vectorize(detection_nonproduct_state(n, z_site)), l, times, eo, x1, x2);
  merge(rep.physicality, product.tracker);
  merge(rep.physicality, nonproduct.tracker);
  emit(rep, cfg, "fig3a_product.csv", ratio_table(product));
  emit(rep, cfg, "fig3a_nonproduct.csv", ratio_table(nonproduct));

  const double r0 = product.series.samples.front().ratio;
  rep.checks.push_back(less_than("product_ratio_constant", product.series.max_deviation(), const_tol));
  rep.checks.push_back(less_than("product_ratio_value", std::isnan(r0) ? kInf : std::abs(r0 - predicted), const_tol));
  rep.checks.push_back(greater_than("nonproduct_ratio_varies", nonproduct.series.max_deviation(), var_thr));

  const auto f = edge_factorization_test(rho0);
  rep.summary = {{"predicted_ratio", predicted},
                 {"product", ratio_json(product)},
                 {"nonproduct", ratio_json(nonproduct)},
                 {"nonproduct_factorized", edge_factorization_test(vectorize(detection_nonproduct_state(n, z_site))).factorized},
                 {"product_edge_amplitudes", {{"a", f.a}, {"b", f.b}}},
                 {"time_unit", "1/mean_gamma"},
                 {"t_max_absolute", times.back()},
                 {"liouvillian", l.source_tag},
                 {"evolve", evolve_options_json(eo)},
                 {"tolerances",
                  {{"constancy", const_tol}, {"variation", var_thr}, {"physicality", kPhysicalityTol},
                   {"ratio_guard_relative", 1e-9}}}};
  if (diag_site > 0) {
    const auto diag = run_ratio(vectorize(detection_nonproduct_state(n, diag_site)), l, times, eo, x1, x2);
    merge(rep.physicality, diag.tracker);
    emit(rep, cfg, "fig3a_nonproduct_z" + std::to_string(diag_site) + ".csv", ratio_table(diag));
    rep.summary["diagnostic"] = ratio_json(diag);
    rep.summary["diagnostic"]["z_site"] = diag_site;
  }
  rep.checks.push_back(physicality_check(rep.physicality));
  rep.summary["physicality"] = physicality_json(rep.physicality);
  return rep;
}

ExperimentReport run_fig3b(const ExperimentConfig& cfg) {
  const Options o(cfg.options,
                  with_evolve_keys({"draws", "zeta", "bulk_coefficient", "u_values", "constancy_tol",
                                    "variation_threshold"}),
                  "fig3b");
  const int n = cfg.model.n_sites;
  const int draws = o.get("draws", 10);
  const double zeta = o.get("zeta", 0.5);
  const double coef = o.get("bulk_coefficient", 0.2);
  const auto u_values = o.get("u_values", std::vector<double>{0.0, 2.0});
  const double const_tol = o.get("constancy_tol", 1e-6);
  const double var_thr = o.get("variation_threshold", 0.01);
  const EvolveOptions eo = evolve_options(o);
  if (draws < 1) throw ConfigError("fig3b: draws must be positive");
  if (u_values.empty()) throw ConfigError("fig3b: u_values is empty");

  ExperimentReport rep;
  rep.experiment = cfg.experiment;
  const auto rho0 = build_product_state_vector(detection_state_spec(n, coef, zeta), n);
  const OperatorSum x1 = detection_observable(n);
  const OperatorSum x2 = x1 * OperatorSum(parity_operator(n));
  const auto seeds = draw_seeds(cfg.seed, static_cast<std::size_t>(draws));

  // Every (u, draw) pair uses the same counted seed for each u, so draws are paired across u.
  const std::size_t tasks = u_values.size() * seeds.size();
  std::vector<RatioRun> runs(tasks);
  parallel_chunks(tasks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const double u = u_values[k / seeds.size()];
      const ModelParams m = random_perturbed_model(n, seeds[k % seeds.size()], u);
      const double g = time_unit_gamma(m);
      runs[k] = run_ratio(rho0, build_liouvillian(m), uniform_grid(cfg.time_grid.t_max / g, cfg.time_grid.n_samples),
                          eo, x1, x2);
    }
  });

  CsvTable summary({"u", "draw", "seed", "max_deviation", "guarded_samples", "subspace_dim", "min_eigenvalue"});
  json per_u = json::array();
  for (std::size_t ui = 0; ui < u_values.size(); ++ui) {
    const double u = u_values[ui];
    double worst = 0.0, least = kInf;
    for (std::size_t d = 0; d < seeds.size(); ++d) {
      const auto& run = runs[ui * seeds.size() + d];
      const double dev = run.series.max_deviation();
      worst = std::max(worst, dev);
      least = std::min(least, dev);
      merge(rep.physicality, run.tracker);
      emit(rep, cfg, "fig3b_u" + compact(u) + "_draw" + std::to_string(d) + ".csv", ratio_table(run));
      summary.row({compact(u), std::to_string(d), std::to_string(seeds[d]), format_double(dev),
                   std::to_string(run.series.guarded_count()), std::to_string(run.subspace_dim),
                   format_double(run.tracker.worst.min_eigenvalue)});
    }
    const std::string tag = "u" + compact(u);
    if (u == 0.0) {
      rep.checks.push_back(less_than(tag + "_all_ratios_constant", worst, const_tol));
    } else {
      rep.checks.push_back(greater_than(tag + "_all_ratios_vary", least, var_thr));
    }
    per_u.push_back({{"u", u}, {"max_deviation_worst", worst}, {"max_deviation_least", least}});
  }
  emit(rep, cfg, "fig3b_summary.csv", summary);
  rep.checks.push_back(physicality_check(rep.physicality));
  rep.summary = {{"draw_seeds", seeds},
                 {"per_u", per_u},
                 {"time_unit", "1/mean_gamma of each draw"},
                 {"evolve", evolve_options_json(eo)},
                 {"physicality", physicality_json(rep.physicality)},
                 {"tolerances", {{"constancy", const_tol}, {"variation", var_thr}, {"physicality", kPhysicalityTol}}}};
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Purity and spectrum experiments

ExperimentReport run_fig4_purity(const ExperimentConfig& cfg) {
  const Options o(cfg.options, with_evolve_keys({"gammas", "coefficient", "zeta", "relative_error_threshold"}),
                  "fig4-purity");
  const int n = cfg.model.n_sites;
  const auto gammas = o.get("gammas", std::vector<double>{1.0, 2.0, 4.0, 8.0});
  const double coef = o.get("coefficient", 0.3);
  const double zeta = o.get("zeta", 0.4);
  const double thr = o.get("relative_error_threshold", 0.05);
  const EvolveOptions eo = evolve_options(o);
  if (gammas.empty()) throw ConfigError("fig4-purity: gammas is empty");
  for (double g : gammas) {
    if (!(g > 0.0)) throw ConfigError("fig4-purity: gammas must be positive");
  }

  ExperimentReport rep;
  rep.experiment = cfg.experiment;
  const auto rho0 = vectorize(purity_experiment_state(n, coef, zeta));
  const auto set = long_time_observable_set(n);
  json per_gamma = json::array();
  for (double g : gammas) {
    const ModelParams m = with_uniform_gamma(cfg.model, g);
    const auto times = uniform_grid(cfg.time_grid.t_max / g, cfg.time_grid.n_samples);
    const std::size_t ns = times.size();
    std::vector<double> exact(ns), approx(ns), trunc(ns), kc(ns), kc_approx(ns);
    std::vector<PhysicalityReport> phys(ns);
    const auto res = evolve(rho0, build_liouvillian(m), times, eo, [&](std::size_t k, double, const LiouvilleVector& r) {
      exact[k] = purity(r);
      approx[k] = approx_purity_longtime(r);
      trunc[k] = purity_from_observables(r, set);
      kc[k] = kappa_correlation(r);
      kc_approx[k] = approx_kappa_correlation_longtime(r);
      phys[k] = physicality(r);
    });
    CsvTable t({"gamma_t", "t", "purity_exact", "purity_approx", "purity_truncated", "relative_error",
                "kappa_correlation", "kappa_correlation_approx", "min_eigenvalue"});
    double threshold = kNaN;
    for (std::size_t k = ns; k-- > 0;) {
      if (std::abs(approx[k] - exact[k]) / exact[k] >= thr) break;
      threshold = g * times[k];
    }
    for (std::size_t k = 0; k < ns; ++k) {
      rep.physicality.add(phys[k]);
      t.values({g * times[k], times[k], exact[k], approx[k], trunc[k], std::abs(approx[k] - exact[k]) / exact[k], kc[k],
             kc_approx[k], phys[k].min_eigenvalue});
    }
    emit(rep, cfg, "fig4_purity_gamma" + compact(g) + ".csv", t);
    const double final_err = std::abs(approx.back() - exact.back()) / exact.back();
    rep.checks.push_back(less_than("approx_purity_converges_gamma" + compact(g), final_err, thr));
    per_gamma.push_back({{"gamma", g},
                         {"gamma_t_threshold", threshold},
                         {"initial_relative_error", std::abs(approx.front() - exact.front()) / exact.front()},
                         {"final_relative_error", final_err},
                         {"method", res.method_tag},
                         {"subspace_dim", res.subspace_dim}});
  }
  rep.checks.push_back(physicality_check(rep.physicality));
  rep.summary = {{"per_gamma", per_gamma},
                 {"threshold_definition", "smallest sampled gamma*t after which relative error stays below threshold"},
                 {"evolve", evolve_options_json(eo)},
                 {"physicality", physicality_json(rep.physicality)},
                 {"tolerances", {{"relative_error", thr}, {"physicality", kPhysicalityTol}}}};
  return rep;
}

ExperimentReport run_fig4_spectrum(const ExperimentConfig& cfg) {
  const Options o(cfg.options, {"gap_tol", "condition_threshold"}, "fig4-spectrum");
  if (!cfg.sector) throw ConfigError("fig4-spectrum: 'sector' is required");
  const int n = cfg.model.n_sites;
  const GammaScanConfig scan = cfg.gamma_scan.value_or(GammaScanConfig{});
  EPScanOptions eo;
  eo.gamma_min = scan.gamma_min;
  eo.gamma_max = scan.gamma_max;
  eo.n_points = scan.n_points;
  eo.sector = SectorLabel::parse(*cfg.sector);
  eo.gap_tol = o.get("gap_tol", eo.gap_tol);
  eo.condition_threshold = o.get("condition_threshold", eo.condition_threshold);

  ExperimentReport rep;
  rep.experiment = cfg.experiment;
  const auto block = restrict_liouvillian(build_liouvillian(cfg.model), eo.sector);
  const double expected_dim = std::ldexp(1.0, n + 1);
  rep.checks.push_back({"block_dimension", static_cast<double>(block.basis.size()) == expected_dim,
                        static_cast<double>(block.basis.size()), expected_dim, "=="});

  const auto r = exceptional_point_scan(cfg.model, eo);
  CsvTable rows({"gamma", "min_gap", "condition", "defective"});
  CsvTable spectrum({"gamma", "index", "re", "im"});
  std::size_t defective = 0;
  for (const auto& row : r.rows) {
    defective += row.defective;
    rows.row({format_double(row.gamma), format_double(row.min_gap), format_double(row.condition),
              row.defective ? "1" : "0"});
    for (std::size_t k = 0; k < row.eigenvalues.size(); ++k) {
      spectrum.row({format_double(row.gamma), std::to_string(k), format_double(row.eigenvalues[k].real()),
                    format_double(row.eigenvalues[k].imag())});
    }
  }
  emit(rep, cfg, "ep_scan.csv", rows);
  emit(rep, cfg, "ep_spectrum.csv", spectrum);

  // The isolated two-site segment next to the flipped bond merges at gamma = J of that bond.
  const auto segments = broken_chain_segments(eo.sector);
  double j_pair = kNaN;
  for (const auto& [a, b] : segments) {
    if (b == a + 1) j_pair = cfg.model.couplings.at(static_cast<std::size_t>(a - 1));
  }
  const double step = (eo.gamma_max - eo.gamma_min) / (eo.n_points - 1);
  rep.checks.push_back(greater_than("defective_rows_present", static_cast<double>(defective), 0.0));
  const double ep_err = (r.refined_gamma && !std::isnan(j_pair)) ? std::abs(*r.refined_gamma - j_pair) : kInf;
  rep.checks.push_back({"isolated_pair_ep_at_J", ep_err <= step, ep_err, step, "<="});
  rep.summary = {{"sector", eo.sector.to_string()},
                 {"block_dimension", block.basis.size()},
                 {"defective_rows", defective},
                 {"pair_coupling", j_pair},
                 {"refined_gamma", r.refined_gamma ? json(*r.refined_gamma) : json(nullptr)},
                 {"refined_min_gap", r.refined_min_gap},
                 {"refined_condition", r.refined_condition},
                 {"grid_step", step},
                 {"tolerances", {{"gap", eo.gap_tol}, {"condition", eo.condition_threshold}}}};
  return rep;
}

ExperimentReport run_sector_census(const ExperimentConfig& cfg) {
  const Options o(cfg.options, {"imag_tol", "trace_tol", "mismatch_tol"}, "sector-census");
  const double imag_tol = o.get("imag_tol", 1e-9);
  const double trace_tol = o.get("trace_tol", 1e-8);
  const double mismatch_tol = o.get("mismatch_tol", 1e-9);
  const int n = cfg.model.n_sites;

  ExperimentReport rep;
  rep.experiment = cfg.experiment;
  const auto l = build_liouvillian(cfg.model);
  const auto labels = all_sector_labels(n);
  const bool compose = !cfg.model.has_perturbations();

  struct Row {
    std::size_t dim = 0;
    SpectrumReport spec;
    double mismatch = kNaN;
  };
  std::vector<Row> out(labels.size());
  std::vector<SectorBlock> blocks(labels.size());
  parallel_chunks(labels.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      blocks[k] = restrict_liouvillian(l, labels[k]);
      out[k].dim = blocks[k].basis.size();
      out[k].spec = spectrum_analysis(blocks[k].matrix, blocks[k].basis, n);
      if (compose) out[k].mismatch = spectrum_mismatch(out[k].spec.eigenvalues, composed_block_spectrum(labels[k], cfg.model));
    }
  });

  CsvTable table({"sector", "dimension", "unpaired", "max_imag", "max_decaying_trace", "stationary", "composed_mismatch"});
  std::ostringstream spectra;
  std::size_t total_dim = 0, unpaired = 0;
  double max_imag = -kInf, max_trace = 0.0, max_mismatch = 0.0;
  bool dims_ok = true;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& r = out[k];
    total_dim += r.dim;
    dims_ok = dims_ok && static_cast<double>(r.dim) == std::ldexp(1.0, n + 1);
    unpaired += r.spec.unpaired;
    max_imag = std::max(max_imag, r.spec.max_imag);
    max_trace = std::max(max_trace, r.spec.max_decaying_trace);
    if (compose) max_mismatch = std::max(max_mismatch, r.mismatch);
    table.row({labels[k].to_string(), std::to_string(r.dim), std::to_string(r.spec.unpaired),
               format_double(r.spec.max_imag), format_double(r.spec.max_decaying_trace),
               std::to_string(r.spec.stationary_count), format_double(r.mismatch)});
    write_spectrum_csv(spectra, labels[k], r.spec.eigenvalues, k == 0);
  }
  emit(rep, cfg, "sector_census.csv", table);
  if (!cfg.output_dir.empty()) {
    std::ofstream(out_path(cfg, "sector_spectra.csv"), std::ios::binary) << spectra.str();
    rep.files.push_back("sector_spectra.csv");
  }
  rep.checks.push_back({"sector_dimensions", dims_ok && total_dim == l.dim(), static_cast<double>(total_dim),
                        static_cast<double>(l.dim()), "=="});
  rep.checks.push_back(less_than("unpaired_eigenvalues", static_cast<double>(unpaired), 0.5));
  rep.checks.push_back({"max_imag", max_imag <= imag_tol, max_imag, imag_tol, "<="});
  rep.checks.push_back(less_than("max_decaying_trace", max_trace, trace_tol));
  if (compose) rep.checks.push_back(less_than("composed_spectrum_mismatch", max_mismatch, mismatch_tol));
  rep.summary = {{"sectors", labels.size()},
                 {"total_dimension", total_dim},
                 {"composed_spectrum_compared", compose},
                 {"tolerances", {{"imag", imag_tol}, {"trace", trace_tol}, {"mismatch", mismatch_tol}}}};
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Cross-construction oracle suite

ExperimentReport run_oracle_suite(const ExperimentConfig& cfg) {
  const Options o(cfg.options, {"n_min", "n_max", "flip_kappa_sign", "full_spectrum_max_n", "tol"}, "oracle-suite");
  const int n_min = o.get("n_min", 2);
  const int n_max = o.get("n_max", 4);
  const int spec_max = o.get("full_spectrum_max_n", 3);
  const double tol = o.get("tol", 1e-12);
  const KappaConvention conv{o.get("flip_kappa_sign", false)};
  if (n_min < 2 || n_max < n_min || n_max > 6) throw ConfigError("oracle-suite: need 2 <= n_min <= n_max <= 6");

  ExperimentReport rep;
  rep.experiment = cfg.experiment;
  const auto seeds = draw_seeds(cfg.seed, static_cast<std::size_t>(n_max + 1));
  json models = json::array();
  for (int n = n_min; n <= n_max; ++n) {
    const std::string tag = "_N" + std::to_string(n);
    // Inhomogeneous unperturbed chain so the fermionic form applies.
    std::mt19937_64 rng(seeds[static_cast<std::size_t>(n)]);
    std::uniform_real_distribution<double> uj(0.5, 1.5), ug(0.2, 1.2);
    ModelParams p = ModelParams::uniform(n, 1.0, 1.0);
    for (auto& j : p.couplings) j = uj(rng);
    for (auto& g : p.dephasing_rates) g = ug(rng);
    models.push_back(model_to_json(p));

    const auto direct = build_liouvillian_direct(p);
    const auto thirdq = build_liouvillian_thirdq(p);
    rep.checks.push_back(less_than("thirdq_vs_direct" + tag, max_abs_diff(direct.matrix, thirdq.matrix), tol));
    rep.checks.push_back(less_than("direct_vs_dense_lindblad" + tag, direct_vs_dense_deviation(p, direct), tol));

    double pj = 0.0;
    for (int j = 1; j < n; ++j) pj = std::max(pj, commutator_norm(thirdq.matrix, build_P_operator(j, n)));
    rep.checks.push_back(less_than("commutator_L_Pj" + tag, pj, tol));
    const double edge = std::max(commutator_norm(thirdq.matrix, kappa_as_liouville_matrix(1, n, conv)),
                                 commutator_norm(thirdq.matrix, kappa_as_liouville_matrix(4 * n, n, conv)));
    rep.checks.push_back(less_than("commutator_L_edge_kappas" + tag, edge, tol));
    rep.checks.push_back(less_than("kappa_clifford_algebra" + tag, clifford_deviation(n, conv), tol));

    double kitaev = 0.0, composed = 0.0;
    for (const auto& label : all_sector_labels(n)) {
      const auto block = restrict_liouvillian(thirdq, label);
      kitaev = std::max(kitaev, (kitaev_form_reconstruction(label, p, conv) - block.matrix).cwiseAbs().maxCoeff());
      composed = std::max(composed, spectrum_mismatch(eigenvalues_of(block.matrix), composed_block_spectrum(label, p)));
    }
    rep.checks.push_back(less_than("kitaev_reconstruction" + tag, kitaev, tol));
    rep.checks.push_back(less_than("composed_block_spectrum" + tag, composed, 1e-9));

    double stat = 0.0;
    for (double z : {-1.0, -0.5, 0.0, 0.5, 1.0}) stat = std::max(stat, stationary_residual(thirdq, n, z));
    rep.checks.push_back(less_than("stationary_family" + tag, stat, tol));

    if (n <= spec_max) {
      const auto s = spectrum_analysis(Eigen::MatrixXcd(thirdq.matrix), {}, n);
      rep.checks.push_back(less_than("full_spectrum_unpaired" + tag, static_cast<double>(s.unpaired), 0.5));
      rep.checks.push_back({"full_spectrum_max_imag" + tag, s.max_imag <= 1e-9, s.max_imag, 1e-9, "<="});
      rep.checks.push_back(less_than("full_spectrum_decaying_trace" + tag, s.max_decaying_trace, 1e-8));
    }
  }
  rep.summary = {{"models", models},
                 {"flip_kappa_sign", conv.flip_odd_sign},
                 {"tolerances", {{"entrywise", tol}, {"spectral_mismatch", 1e-9}, {"imag", 1e-9}, {"trace", 1e-8}}}};
  return rep;
}

// ---------------------------------------------------------------------------------------------

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  if (cfg.experiment == "fig3a") rep = run_fig3a(cfg);
  else if (cfg.experiment == "fig3b") rep = run_fig3b(cfg);
  else if (cfg.experiment == "fig4-purity") rep = run_fig4_purity(cfg);
  else if (cfg.experiment == "fig4-spectrum") rep = run_fig4_spectrum(cfg);
  else if (cfg.experiment == "sector-census") rep = run_sector_census(cfg);
  else if (cfg.experiment == "oracle-suite") rep = run_oracle_suite(cfg);
  else throw ConfigError("unknown experiment '" + cfg.experiment + "'");
  if (!cfg.output_dir.empty()) {
    json meta = rep.to_json();
    meta["config"] = cfg.to_json();
    meta["seed"] = cfg.seed;
    meta["version"] = version_string();
    meta["dense_limit"] = dense_limit();
    write_json(out_path(cfg, "metadata.json"), meta);
  }
  return rep;
}

}  // namespace lmem
