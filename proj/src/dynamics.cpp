#include "lmem/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lmem/parallel.hpp"

namespace lmem {

namespace {

using Vec = Eigen::VectorXcd;
constexpr cplx kI{0.0, 1.0};

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

struct Tableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

class Dopri5 {
 public:
  Dopri5(const SparseOp& l, const EvolveOptions& opts) : l_(l), opts_(opts) {}

  void rhs(const Vec& y, Vec& out) const { out.noalias() = -kI * (l_ * y); }

  double error_norm(const Vec& err, const Vec& y0, const Vec& y1) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
      const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double r = std::abs(err[i]) / sc;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
  }

  double initial_step(const Vec& y, const Vec& f) const {
    Vec sc = (opts_.atol + opts_.rtol * y.cwiseAbs().array()).matrix().cast<cplx>();
    const auto scaled_norm = [&](const Vec& v) {
      return std::sqrt((v.cwiseAbs().array() / sc.real().array()).square().mean());
    };
    const double d0 = scaled_norm(y), d1 = scaled_norm(f);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    Vec y1 = y + h0 * f, f1(y.size());
    rhs(y1, f1);
    const double d2 = scaled_norm(f1 - f) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::min(100 * h0, h1);
  }

  // Advances y from t to t_end exactly.
  void advance(Vec& y, double t, double t_end, double& h, long& accepted, long& rejected) {
    if (t_end <= t) return;
    const std::size_t n = static_cast<std::size_t>(y.size());
    if (k1_.size() != static_cast<Eigen::Index>(n)) {
      for (Vec* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_}) v->resize(n);
      have_fsal_ = false;
    }
    if (!have_fsal_) {
      rhs(y, k1_);
      have_fsal_ = true;
    }
    if (h <= 0.0) h = initial_step(y, k1_);
    using T = Tableau;
    bool last_rejected = false;
    while (t < t_end) {
      if (accepted + rejected > opts_.max_steps) throw IntegratorError("integrator exceeded max_steps");
      const bool final_step = t + h >= t_end * (1 - 1e-14);
      const double hs = final_step ? t_end - t : h;
      tmp_ = y + hs * T::a21 * k1_;
      rhs(tmp_, k2_);
      tmp_ = y + hs * (T::a31 * k1_ + T::a32 * k2_);
      rhs(tmp_, k3_);
      tmp_ = y + hs * (T::a41 * k1_ + T::a42 * k2_ + T::a43 * k3_);
      rhs(tmp_, k4_);
      tmp_ = y + hs * (T::a51 * k1_ + T::a52 * k2_ + T::a53 * k3_ + T::a54 * k4_);
      rhs(tmp_, k5_);
      tmp_ = y + hs * (T::a61 * k1_ + T::a62 * k2_ + T::a63 * k3_ + T::a64 * k4_ + T::a65 * k5_);
      rhs(tmp_, k6_);
      ynew_ = y + hs * (T::b1 * k1_ + T::b3 * k3_ + T::b4 * k4_ + T::b5 * k5_ + T::b6 * k6_);
      rhs(ynew_, k7_);
      tmp_ = hs * (T::e1 * k1_ + T::e3 * k3_ + T::e4 * k4_ + T::e5 * k5_ + T::e6 * k6_ + T::e7 * k7_);
      const double err = error_norm(tmp_, y, ynew_);
      if (!std::isfinite(err)) throw IntegratorError("integrator produced a non-finite error estimate");
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        ++accepted;
        t = final_step ? t_end : t + hs;
        y.swap(ynew_);
        k1_.swap(k7_);
        // Keep the controller's step when the last step was shortened to hit the grid.
        if (!final_step || hs >= h) h = last_rejected ? std::min(h, hs * factor) : hs * factor;
        last_rejected = false;
      } else {
        ++rejected;
        h = hs * std::max(0.2, factor);
        last_rejected = true;
        if (h < 1e-14 * std::max(1.0, std::abs(t))) throw IntegratorError("integrator step size underflow");
      }
    }
  }

 private:
  const SparseOp& l_;
  EvolveOptions opts_;
  Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
  bool have_fsal_ = false;
};

// Submatrix of l on sorted index set `idx`.
SparseOp restrict_to(const SparseOp& l, const std::vector<LiouvilleIndex>& idx) {
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (SparseOp::InnerIterator it(l, idx[r]); it; ++it) {
      const auto col = static_cast<LiouvilleIndex>(it.col());
      const auto pos = std::lower_bound(idx.begin(), idx.end(), col);
      if (pos != idx.end() && *pos == col) {
        trips.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(pos - idx.begin()), it.value());
      }
    }
  }
  SparseOp m(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::string to_string(EvolutionMethod m) {
  return m == EvolutionMethod::Integrator ? "integrator" : "eigen-expansion";
}

EvolutionMethod evolution_method_from_string(const std::string& s) {
  if (s == "integrator") return EvolutionMethod::Integrator;
  if (s == "eigen-expansion") return EvolutionMethod::EigenExpansion;
  throw std::invalid_argument("unknown evolution method '" + s + "'");
}

std::vector<double> uniform_grid(double t_max, int n_samples) {
  if (n_samples < 1 || !(t_max >= 0.0)) throw std::invalid_argument("uniform_grid: need n_samples >= 1, t_max >= 0");
  std::vector<double> t(n_samples);
  for (int i = 0; i < n_samples; ++i) t[i] = n_samples == 1 ? t_max : t_max * i / (n_samples - 1);
  return t;
}

std::vector<std::vector<LiouvilleIndex>> invariant_components(const SparseOp& l,
                                                              const std::vector<LiouvilleIndex>& support) {
  const Eigen::SparseMatrix<cplx, Eigen::ColMajor> cols = l;
  const auto dim = static_cast<std::size_t>(l.rows());
  std::vector<char> seen(dim, 0);
  std::vector<LiouvilleIndex> order;
  std::vector<LiouvilleIndex> stack(support.begin(), support.end());
  for (auto a : support) seen[a] = 1;
  while (!stack.empty()) {
    const LiouvilleIndex a = stack.back();
    stack.pop_back();
    order.push_back(a);
    for (Eigen::SparseMatrix<cplx, Eigen::ColMajor>::InnerIterator it(cols, a); it; ++it) {
      const auto r = static_cast<LiouvilleIndex>(it.row());
      if (!seen[r] && it.value() != cplx{}) {
        seen[r] = 1;
        stack.push_back(r);
      }
    }
  }
  std::sort(order.begin(), order.end());
  DisjointSets sets(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (Eigen::SparseMatrix<cplx, Eigen::ColMajor>::InnerIterator it(cols, order[k]); it; ++it) {
      if (it.value() == cplx{}) continue;
      const auto pos = std::lower_bound(order.begin(), order.end(), static_cast<LiouvilleIndex>(it.row()));
      sets.unite(k, static_cast<std::size_t>(pos - order.begin()));
    }
  }
  std::vector<std::vector<LiouvilleIndex>> comps;
  std::vector<std::size_t> slot(order.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t root = sets.find(k);
    if (slot[root] == std::numeric_limits<std::size_t>::max()) {
      slot[root] = comps.size();
      comps.emplace_back();
    }
    comps[slot[root]].push_back(order[k]);
  }
  return comps;
}

EvolutionResult evolve(const LiouvilleVector& rho0, const Superoperator& l, const std::vector<double>& times,
                       const EvolveOptions& opts, const EvolutionObserver& observer) {
  if (rho0.n_sites != l.n_sites) throw std::invalid_argument("evolve: state and Liouvillian sizes differ");
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0)) {
    throw std::invalid_argument("evolve: time grid must be increasing and non-negative");
  }
  EvolutionResult res;
  res.times = times;
  res.method_tag = to_string(opts.method);

  std::vector<std::vector<LiouvilleIndex>> comps;
  if (opts.reduce) {
    // Round-off residue from vectorization would otherwise pull in whole sectors.
    const double cutoff = 1e-15 * rho0.amplitudes.cwiseAbs().maxCoeff();
    std::vector<LiouvilleIndex> support;
    for (LiouvilleIndex a = 0; a < rho0.dim(); ++a) {
      if (std::abs(rho0.amplitudes[a]) > cutoff) support.push_back(a);
    }
    comps = invariant_components(l.matrix, support);
  } else {
    std::vector<LiouvilleIndex> all(rho0.dim());
    std::iota(all.begin(), all.end(), 0);
    comps = {all};
  }
  res.components = comps.size();

  std::vector<LiouvilleIndex> idx;
  for (const auto& c : comps) idx.insert(idx.end(), c.begin(), c.end());
  std::sort(idx.begin(), idx.end());
  res.subspace_dim = idx.size();

  const auto emit = [&](std::size_t k, const Vec& y, const std::vector<LiouvilleIndex>& where) {
    LiouvilleVector full(rho0.n_sites);
    for (std::size_t i = 0; i < where.size(); ++i) full.amplitudes[where[i]] = y[static_cast<Eigen::Index>(i)];
    if (observer) observer(k, times[k], full);
    if (opts.store_states) res.states.push_back(std::move(full));
  };

  if (opts.method == EvolutionMethod::Integrator) {
    const SparseOp sub = restrict_to(l.matrix, idx);
    Vec y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) y[static_cast<Eigen::Index>(i)] = rho0.amplitudes[idx[i]];
    Dopri5 solver(sub, opts);
    double t = 0.0, h = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      solver.advance(y, t, times[k], h, res.steps_accepted, res.steps_rejected);
      t = std::max(t, times[k]);
      emit(k, y, idx);
    }
    return res;
  }

  // Eigen-expansion: y(t) = V exp(-i Lambda t) V^{-1} y(0) per invariant component.
  struct Expansion {
    Vec lambda;
    Eigen::MatrixXcd v;
    Vec coeff;
  };
  std::vector<Expansion> exps(comps.size());
  for (const auto& c : comps) {
    if (c.size() > opts.eigen_max_dim) {
      throw std::invalid_argument("evolve: invariant component of size " + std::to_string(c.size()) +
                                  " exceeds eigen_max_dim");
    }
  }
  parallel_chunks(comps.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t ci = lo; ci < hi; ++ci) {
      const Eigen::MatrixXcd dense = Eigen::MatrixXcd(restrict_to(l.matrix, comps[ci]));
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense);
      if (es.info() != Eigen::Success) throw std::runtime_error("evolve: eigen-decomposition failed");
      Vec y0(static_cast<Eigen::Index>(comps[ci].size()));
      for (std::size_t i = 0; i < comps[ci].size(); ++i) y0[static_cast<Eigen::Index>(i)] = rho0.amplitudes[comps[ci][i]];
      exps[ci] = {es.eigenvalues(), es.eigenvectors(), es.eigenvectors().partialPivLu().solve(y0)};
    }
  });
  for (std::size_t k = 0; k < times.size(); ++k) {
    LiouvilleVector full(rho0.n_sites);
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
      const auto& e = exps[ci];
      const Vec phased = (e.lambda.array() * (-kI * times[k])).exp() * e.coeff.array();
      const Vec y = e.v * phased;
      for (std::size_t i = 0; i < comps[ci].size(); ++i) full.amplitudes[comps[ci][i]] = y[static_cast<Eigen::Index>(i)];
    }
    if (observer) observer(k, times[k], full);
    if (opts.store_states) res.states.push_back(std::move(full));
  }
  return res;
}

Superoperator build_liouvillian(const ModelParams& model) {
  return model.has_perturbations() ? build_liouvillian_direct(model) : build_liouvillian_thirdq(model);
}

EvolutionResult evolve(const Eigen::MatrixXcd& rho0, const ModelParams& model, const std::vector<double>& times,
                       const EvolveOptions& opts, const EvolutionObserver& observer) {
  if (rho0.rows() != (Eigen::Index{1} << model.n_sites) || rho0.cols() != rho0.rows()) {
    throw std::invalid_argument("evolve: initial state has the wrong dimension");
  }
  const PhysicalityReport r = physicality(rho0);
  if (r.trace_error > 1e-10 || r.hermiticity_error > 1e-10 || r.min_eigenvalue < -1e-10) {
    throw NonPhysicalStateError("evolve: initial state is not a density matrix (trace error " +
                                std::to_string(r.trace_error) + ", min eigenvalue " +
                                std::to_string(r.min_eigenvalue) + ")");
  }
  return evolve(vectorize(rho0), build_liouvillian(model), times, opts, observer);
}

ObservableProbe::ObservableProbe(const OperatorSum& x) {
  const double scale = std::ldexp(1.0, x.n_sites());
  for (const auto& [word, c] : x.terms()) {
    const MajoranaMonomial m = spin_to_majorana(word);
    // tr(w^b w^a) = delta_ab * sign_b * 2^N.
    weights_.emplace_back(static_cast<LiouvilleIndex>(m.occupation),
                          c * m.coefficient * static_cast<double>(m.hermitian_sign()) * scale);
  }
}

cplx ObservableProbe::operator()(const LiouvilleVector& rho) const {
  cplx acc{};
  for (const auto& [a, w] : weights_) acc += w * rho.amplitudes[a];
  return acc;
}

cplx expectation(const OperatorSum& x, const Eigen::MatrixXcd& rho) {
  if (rho.rows() != (Eigen::Index{1} << x.n_sites())) throw std::invalid_argument("expectation: size mismatch");
  cplx acc{};
  for (const auto& [word, c] : x.terms()) {
    const PauliAction act(word);
    cplx tr{};
    for (std::uint64_t z = 0; z < static_cast<std::uint64_t>(rho.rows()); ++z) tr += act.phase(z) * rho(z, z ^ act.flip);
    acc += c * tr;
  }
  return acc;
}

cplx expectation(const OperatorSum& x, const LiouvilleVector& rho) {
  if (rho.n_sites != x.n_sites()) throw std::invalid_argument("expectation: size mismatch");
  return liouville_inner(vectorize(x.adjoint()), rho);
}

PhysicalityReport physicality(const Eigen::MatrixXcd& rho) {
  PhysicalityReport r;
  r.trace_error = std::abs(rho.trace() - 1.0);
  r.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  const Eigen::MatrixXcd h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

PhysicalityReport physicality(const LiouvilleVector& rho) { return physicality(devectorize(rho)); }

void PhysicalityTracker::add(const PhysicalityReport& r) {
  worst.trace_error = std::max(worst.trace_error, r.trace_error);
  worst.hermiticity_error = std::max(worst.hermiticity_error, r.hermiticity_error);
  worst.min_eigenvalue = samples == 0 ? r.min_eigenvalue : std::min(worst.min_eigenvalue, r.min_eigenvalue);
  ++samples;
}

SpectrumReport spectrum_analysis(const Eigen::MatrixXcd& m, const std::vector<LiouvilleIndex>& basis, int n_sites,
                                 const SpectrumOptions& opts) {
  if (m.rows() != m.cols()) throw std::invalid_argument("spectrum_analysis: matrix is not square");
  if (!basis.empty() && static_cast<Eigen::Index>(basis.size()) != m.rows()) {
    throw std::invalid_argument("spectrum_analysis: basis size mismatch");
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectrum_analysis: eigensolver failed");
  SpectrumReport rep;
  const auto n = static_cast<std::size_t>(m.rows());
  rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  rep.max_imag = -std::numeric_limits<double>::infinity();
  double scale = 1.0;
  for (const cplx e : rep.eigenvalues) scale = std::max(scale, std::abs(e));
  for (const cplx e : rep.eigenvalues) {
    rep.max_imag = std::max(rep.max_imag, e.imag());
    if (std::abs(e) < opts.zero_tol * scale) ++rep.stationary_count;
  }

  // Pairing lambda <-> -conj(lambda), greedy nearest partner.
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    const cplx target = -std::conj(rep.eigenvalues[i]);
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] && j != i) continue;
      const double d = std::abs(rep.eigenvalues[j] - target);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    if (best <= opts.pair_tol * scale) {
      used[i] = true;
      used[arg] = true;
      rep.pairing.emplace_back(i, arg);
    } else {
      used[i] = true;
      ++rep.unpaired;
    }
  }

  // Trace of each eigenmatrix with unit Hilbert-Schmidt norm: tr = 2^N v_0 / (2^{N/2} |v|).
  const auto vac_pos = basis.empty() ? std::optional<Eigen::Index>(0) : [&]() -> std::optional<Eigen::Index> {
    const auto it = std::lower_bound(basis.begin(), basis.end(), LiouvilleIndex{0});
    if (it != basis.end() && *it == 0) return it - basis.begin();
    return std::nullopt;
  }();
  const double root = std::ldexp(1.0, n_sites) / std::sqrt(std::ldexp(1.0, n_sites));
  rep.defect_flags.assign(n, false);
  const Eigen::MatrixXcd& v = es.eigenvectors();
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = v.col(static_cast<Eigen::Index>(i));
    if (vac_pos && rep.eigenvalues[i].imag() < -opts.decay_threshold) {
      rep.max_decaying_trace = std::max(rep.max_decaying_trace, root * std::abs(col[*vac_pos]) / col.norm());
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || std::abs(rep.eigenvalues[i] - rep.eigenvalues[j]) > opts.degeneracy_tol * scale) continue;
      const auto cj = v.col(static_cast<Eigen::Index>(j));
      const double overlap = std::abs(col.dot(cj)) / (col.norm() * cj.norm());
      if (overlap > 1.0 - opts.parallel_tol) rep.defect_flags[i] = true;
    }
  }
  return rep;
}

std::pair<double, double> gap_and_condition(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("gap_and_condition: eigensolver failed");
  const auto& ev = es.eigenvalues();
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    for (Eigen::Index j = i + 1; j < ev.size(); ++j) gap = std::min(gap, std::abs(ev[i] - ev[j]));
  Eigen::MatrixXcd v = es.eigenvectors();
  for (Eigen::Index c = 0; c < v.cols(); ++c) v.col(c).normalize();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v);
  const auto& s = svd.singularValues();
  const double cond = s[s.size() - 1] > 0 ? s[0] / s[s.size() - 1] : std::numeric_limits<double>::infinity();
  return {gap, cond};
}

EPScanResult exceptional_point_scan(const ModelParams& base, const EPScanOptions& opts) {
  base.validate();
  if (opts.n_points < 2 || !(opts.gamma_max > opts.gamma_min)) {
    throw std::invalid_argument("exceptional_point_scan: need n_points >= 2 and gamma_max > gamma_min");
  }
  const SectorLabel label = opts.sector.values().empty() ? SectorLabel::all_plus(base.n_sites) : opts.sector;
  if (label.n_sites() != base.n_sites) throw std::invalid_argument("exceptional_point_scan: sector length mismatch");
  const auto segments = broken_chain_segments(label);

  const auto with_gamma = [&](double g) {
    ModelParams p = base;
    std::fill(p.dephasing_rates.begin(), p.dephasing_rates.end(), g);
    return p;
  };
  const auto segment_probe = [&](const ModelParams& p) {
    double gap = std::numeric_limits<double>::infinity(), cond = 1.0;
    for (const auto& [first, last] : segments) {
      if (first == last) continue;
      const auto [g, c] = gap_and_condition(segment_matrix(first, last, p));
      gap = std::min(gap, g);
      cond = std::max(cond, c);
    }
    return std::pair{gap, cond};
  };

  EPScanResult out;
  out.rows.resize(static_cast<std::size_t>(opts.n_points));
  parallel_chunks(out.rows.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double g = opts.gamma_min + (opts.gamma_max - opts.gamma_min) * static_cast<double>(i) /
                                            static_cast<double>(opts.n_points - 1);
      const ModelParams p = with_gamma(g);
      EPScanRow row;
      row.gamma = g;
      row.eigenvalues = eigenvalues_of(restrict_liouvillian(build_liouvillian(p), label).matrix);
      sort_spectrum(row.eigenvalues);
      std::tie(row.min_gap, row.condition) = segment_probe(p);
      row.defective = row.min_gap < opts.gap_tol && row.condition > opts.condition_threshold;
      out.rows[i] = std::move(row);
    }
  });

  if (opts.refine) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
      if (out.rows[i].min_gap < out.rows[k].min_gap) k = i;
    }
    if (std::isfinite(out.rows[k].min_gap)) {
      double a = out.rows[k == 0 ? 0 : k - 1].gamma;
      double b = out.rows[std::min(k + 1, out.rows.size() - 1)].gamma;
      const double phi = (std::sqrt(5.0) - 1) / 2;
      const auto f = [&](double g) { return segment_probe(with_gamma(g)).first; };
      double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
      double f1 = f(x1), f2 = f(x2);
      for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
        if (f1 < f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - phi * (b - a);
          f1 = f(x1);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + phi * (b - a);
          f2 = f(x2);
        }
      }
      // Keep the grid point if it is already the better minimum.
      double best = 0.5 * (a + b);
      if (out.rows[k].min_gap <= f(best)) best = out.rows[k].gamma;
      out.refined_gamma = best;
      std::tie(out.refined_min_gap, out.refined_condition) = segment_probe(with_gamma(best));
    }
  }
  return out;
}

}  // namespace lmem
