#include "lmem/lmem_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lmem {

namespace {

PauliString site_word(int n, int site, Pauli p) { return PauliString::single(n, site, p); }

OperatorSum as_sum(const PauliString& p) { return OperatorSum(p); }

// Left or right multiplication table by a Pauli word on the Majorana basis.
MonomialOp pauli_multiplication(const PauliString& p, bool from_left) {
  const int n = p.n_sites();
  const std::size_t dim = liouville_dim(n);
  std::vector<LiouvilleIndex> target(dim);
  std::vector<cplx> factor(dim);
  for (LiouvilleIndex a = 0; a < dim; ++a) {
    const auto [wa, ea] = majorana_word(n, a);
    const PauliString q = from_left ? pauli_multiply(p, wa) : pauli_multiply(wa, p);
    const auto b = static_cast<LiouvilleIndex>(majorana_occupation(q));
    const auto [wb, eb] = majorana_word(n, b);
    // w^a = i^ea W_a and q = i^{phase(q)} W_b = i^{phase(q) - eb} w^b.
    target[a] = b;
    factor[a] = phase_of(ea + q.phase_exponent() - eb - wb.phase_exponent());
  }
  return make_monomial(n, std::move(target), std::move(factor));
}

void check_terms(const std::vector<ProductTerm>& terms, EdgeCategory expected, int n) {
  for (const auto& t : terms) {
    if (t.op.n_sites() != n) throw std::invalid_argument("ProductStateSpec: operator size mismatch");
    if (!std::isfinite(t.coefficient)) throw std::invalid_argument("ProductStateSpec: non-finite coefficient");
    if (!t.op.is_hermitian()) throw std::invalid_argument("ProductStateSpec: " + t.op.to_string() + " is not Hermitian");
    const auto c = classify_operator(t.op);
    if (c.category != expected) {
      throw std::invalid_argument(std::string("ProductStateSpec: ") + t.op.to_string() + " has category " +
                                  to_char(c.category) + ", listed under " + to_char(expected));
    }
  }
}

OperatorSum weighted(const std::vector<ProductTerm>& terms, int n) {
  OperatorSum s(n);
  for (const auto& t : terms) s.add(t.op, t.coefficient);
  return s;
}

double norm2(const LiouvilleVector& v) { return std::sqrt(std::max(0.0, liouville_inner(v, v).real())); }

}  // namespace

char to_char(EdgeCategory c) { return static_cast<char>('A' + static_cast<int>(c)); }

PauliString edge_reference_word(int n) {
  return parity_operator(n) * site_word(n, 1, Pauli::X) * site_word(n, n, Pauli::X);
}

EdgeCategory category_of(int delta, int gamma) {
  if (delta > 0) return gamma > 0 ? EdgeCategory::A : EdgeCategory::C;
  return gamma > 0 ? EdgeCategory::B : EdgeCategory::D;
}

EdgeClassification classify_operator(const PauliString& o) {
  const int n = o.n_sites();
  if (n < 2) throw std::invalid_argument("classify_operator: need at least two sites");
  if (pauli_commutation_sign(o, parity_operator(n)) < 0) {
    throw ClassificationError("classify_operator: " + o.to_string() + " anticommutes with the parity");
  }
  EdgeClassification c;
  c.delta = pauli_commutation_sign(o, edge_reference_word(n));
  c.gamma = pauli_commutation_sign(o, site_word(n, n, Pauli::X));
  c.category = category_of(c.delta, c.gamma);
  return c;
}

MonomialOp pauli_left(const PauliString& p) { return pauli_multiplication(p, true); }
MonomialOp pauli_right(const PauliString& p) { return pauli_multiplication(p, false); }

void ProductStateSpec::validate(int n) const {
  if (!(zeta >= -1.0 && zeta <= 1.0)) throw std::invalid_argument("ProductStateSpec: zeta outside [-1, 1]");
  check_terms(a_terms, EdgeCategory::A, n);
  check_terms(b_terms, EdgeCategory::B, n);
  check_terms(c_terms, EdgeCategory::C, n);
  check_terms(d_terms, EdgeCategory::D, n);
}

bool positivity_precheck(const ProductStateSpec& spec) {
  // 2^N rho = (I + zeta M) + R with |R| <= sum|coef| (1 + |zeta|).
  double s = 0.0;
  for (const auto* list : {&spec.a_terms, &spec.b_terms, &spec.c_terms, &spec.d_terms})
    for (const auto& t : *list) s += std::abs(t.coefficient);
  return s * (1.0 + std::abs(spec.zeta)) <= 1.0 - std::abs(spec.zeta);
}

OperatorSum product_state_operator(const ProductStateSpec& spec, int n) {
  spec.validate(n);
  const OperatorSum id = as_sum(PauliString(n));
  const OperatorSum m = as_sum(parity_operator(n));
  const OperatorSum s = id + weighted(spec.a_terms, n) + weighted(spec.c_terms, n) * m;
  const OperatorSum t = weighted(spec.b_terms, n) * m + weighted(spec.d_terms, n);
  OperatorSum rho = s * (id + spec.zeta * m) - t * (id - spec.zeta * m);
  rho *= std::ldexp(1.0, -n);
  return rho;
}

Eigen::MatrixXcd build_product_state(const ProductStateSpec& spec, int n) {
  const Eigen::MatrixXcd rho = product_state_operator(spec, n).to_matrix();
  const PhysicalityReport r = physicality(rho);
  if (r.min_eigenvalue < -1e-10) {
    throw NonPositiveStateError(r.min_eigenvalue,
                                "build_product_state: min eigenvalue " + std::to_string(r.min_eigenvalue));
  }
  return rho;
}

LiouvilleVector build_product_state_vector(const ProductStateSpec& spec, int n) {
  if (n <= dense_limit()) return vectorize(build_product_state(spec, n));
  if (!positivity_precheck(spec)) {
    throw NonPositiveStateError(std::numeric_limits<double>::quiet_NaN(),
                                "build_product_state_vector: positivity cannot be verified above the dense limit");
  }
  return vectorize(product_state_operator(spec, n));
}

MonomialOp edge_parity_op(int n) {
  const PauliString x1xn = site_word(n, 1, Pauli::X) * site_word(n, n, Pauli::X);
  return pauli_left(parity_operator(n) * x1xn) * pauli_right(x1xn);
}

EdgeFactorization edge_factorization_test(const LiouvilleVector& rho, double tol) {
  const int n = rho.n_sites;
  const LiouvilleVector k = edge_parity_op(n).apply(rho);
  const LiouvilleVector rho1(n, 0.5 * (rho.amplitudes + k.amplitudes));
  const LiouvilleVector rho0(n, 0.5 * (rho.amplitudes - k.amplitudes));
  const double scale = std::max(norm2(rho), std::numeric_limits<double>::min());
  EdgeFactorization f;
  const double n1 = norm2(rho1), n0 = norm2(rho0);
  if (n0 <= tol * scale || n1 <= tol * scale) {
    f.factorized = true;
    f.a = n0 <= tol * scale ? 1.0 : 0.0;
    f.b = 1.0 - f.a;
    f.residual = std::min(n0, n1) / scale;
    return f;
  }
  // The occupied bulk factor must be parallel to kappa_1 applied to the empty one.
  const LiouvilleVector v = kappa_monomial(1, n).apply(rho0);
  const cplx r = liouville_inner(v, rho1) / liouville_inner(v, v);
  f.residual = norm2(LiouvilleVector(n, rho1.amplitudes - r * v.amplitudes)) / scale;
  f.factorized = f.residual < tol;
  // (a, b) ~ (r, 1), phase fixed so that a >= 0.
  const double mod = std::abs(r);
  const double norm = std::sqrt(mod * mod + 1.0);
  f.a = mod / norm;
  f.b = (mod > 0 ? (std::conj(r) / mod).real() : 1.0) / norm;
  return f;
}

EdgeFactorization edge_factorization_test(const Eigen::MatrixXcd& rho, double tol) {
  return edge_factorization_test(vectorize(rho), tol);
}

double RatioSeries::max_deviation() const {
  if (samples.empty() || samples.front().guarded) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& s : samples) {
    if (!s.guarded) worst = std::max(worst, std::abs(s.ratio - samples.front().ratio));
  }
  return worst;
}

std::size_t RatioSeries::guarded_count() const {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.guarded; }));
}

double ratio_guard(double x2_initial) { return std::max(1e-12, 1e-9 * std::abs(x2_initial)); }

RatioSample ratio_sample(const ObservableProbe& x1, const ObservableProbe& x2, double t, const LiouvilleVector& rho,
                         double guard) {
  RatioSample s;
  s.t = t;
  s.x1 = x1(rho).real();
  s.x2 = x2(rho).real();
  s.guarded = std::abs(s.x2) < guard;
  s.ratio = s.guarded ? std::numeric_limits<double>::quiet_NaN() : s.x1 / s.x2;
  return s;
}

RatioSeries ratio_trace(const OperatorSum& x1, const OperatorSum& x2, const EvolutionResult& evolution) {
  if (evolution.states.size() != evolution.times.size()) {
    throw std::invalid_argument("ratio_trace: evolution has no stored states");
  }
  const ObservableProbe p1(x1), p2(x2);
  RatioSeries out;
  if (evolution.states.empty()) return out;
  const double guard = ratio_guard(p2(evolution.states.front()).real());
  for (std::size_t k = 0; k < evolution.states.size(); ++k) {
    out.samples.push_back(ratio_sample(p1, p2, evolution.times[k], evolution.states[k], guard));
  }
  return out;
}

double predicted_ratio(const EdgeClassification& c, double zeta) {
  const double d = c.delta, g = c.gamma;
  return (d + g + d * zeta * (d - g)) / (d - g + d * zeta * (d + g));
}

double kappa_correlation(const Eigen::MatrixXcd& rho) {
  const int n = static_cast<int>(std::log2(static_cast<double>(rho.rows())) + 0.5);
  const PauliString x1xn = site_word(n, 1, Pauli::X) * site_word(n, n, Pauli::X);
  const Eigen::MatrixXcd m = pauli_to_matrix(parity_operator(n) * x1xn);
  const Eigen::MatrixXcd x = pauli_to_matrix(x1xn);
  return (rho.adjoint() * m * rho * x).trace().real();
}

double kappa_correlation(const LiouvilleVector& rho) {
  const int n = rho.n_sites;
  const MonomialOp op = cplx{0.0, 1.0} * (kappa_monomial(1, n) * kappa_monomial(4 * n, n));
  return liouville_inner(rho, op.apply(rho)).real();
}

double purity(const Eigen::MatrixXcd& rho) { return (rho.adjoint() * rho).trace().real(); }
double purity(const LiouvilleVector& rho) { return liouville_inner(rho, rho).real(); }

double purity_from_observables(const LiouvilleVector& rho, const std::vector<PauliString>& set) {
  double acc = 0.0;
  for (const auto& o : set) acc += std::norm(ObservableProbe(as_sum(o))(rho));
  return std::ldexp(acc, -rho.n_sites);
}

double purity_from_observables(const Eigen::MatrixXcd& rho, const std::vector<PauliString>& set) {
  double acc = 0.0;
  int n = 0;
  for (const auto& o : set) {
    acc += std::norm(expectation(as_sum(o), rho));
    n = o.n_sites();
  }
  return std::ldexp(acc, -n);
}

std::vector<PauliString> full_pauli_set(int n) {
  if (n < 1 || n > kMaxLiouvilleSites) throw std::invalid_argument("full_pauli_set: bad size");
  std::vector<PauliString> out;
  out.reserve(liouville_dim(n));
  for (std::uint64_t x = 0; x < (1ULL << n); ++x)
    for (std::uint64_t z = 0; z < (1ULL << n); ++z) out.emplace_back(n, x, z, 0);
  return out;
}

std::vector<PauliString> long_time_observable_set(int n) {
  const PauliString m = parity_operator(n);
  const PauliString y1x2 = site_word(n, 1, Pauli::Y) * site_word(n, 2, Pauli::X);
  const PauliString z1 = site_word(n, 1, Pauli::Z);
  const PauliString id(n);
  // I and M appear in both halves of the union; keep each word once.
  return {id, m, y1x2, z1, y1x2 * m, z1 * m};
}

LongTimeObservables long_time_observables(const LiouvilleVector& rho) {
  const int n = rho.n_sites;
  LongTimeObservables o;
  o.zeta = ObservableProbe(as_sum(parity_operator(n)))(rho).real();
  o.z1 = ObservableProbe(as_sum(site_word(n, 1, Pauli::Z)))(rho).real();
  o.y1x2 = ObservableProbe(as_sum(site_word(n, 1, Pauli::Y) * site_word(n, 2, Pauli::X)))(rho).real();
  return o;
}

double approx_purity_longtime(const LiouvilleVector& rho) {
  const auto o = long_time_observables(rho);
  return std::ldexp((1 + o.zeta * o.zeta) * (1 + o.z1 * o.z1 + o.y1x2 * o.y1x2), -rho.n_sites);
}

double approx_kappa_correlation_longtime(const LiouvilleVector& rho) {
  const auto o = long_time_observables(rho);
  return std::ldexp(o.zeta * (1 + o.z1 * o.z1 + o.y1x2 * o.y1x2), 1 - rho.n_sites);
}

ProductStateSpec detection_state_spec(int n, double coefficient, double zeta) {
  if (n < 3) throw std::invalid_argument("detection state needs N >= 3");
  ProductStateSpec s;
  s.zeta = zeta;
  for (int j = 2; j <= n - 1; ++j) {
    s.a_terms.push_back({coefficient, site_word(n, j, Pauli::X) * site_word(n, j + 1, Pauli::X)});
    s.a_terms.push_back({coefficient, site_word(n, j, Pauli::Z)});
  }
  return s;
}

OperatorSum detection_nonproduct_state(int n, int z_site) {
  if (n < 3) throw std::invalid_argument("detection state needs N >= 3");
  if (z_site < 1 || z_site > n) throw std::out_of_range("detection_nonproduct_state: bad site");
  const OperatorSum id = as_sum(PauliString(n));
  const OperatorSum m = as_sum(parity_operator(n));
  OperatorSum bulk = id;
  for (int j = 2; j <= n - 1; ++j) bulk.add(site_word(n, j, Pauli::X) * site_word(n, j + 1, Pauli::X), 0.1);
  OperatorSum rho = bulk * (id + 0.5 * m) + 0.1 * as_sum(site_word(n, z_site, Pauli::Z)) * (id - 0.5 * m);
  rho *= std::ldexp(1.0, -n);
  return rho;
}

OperatorSum detection_observable(int n) {
  OperatorSum x(n);
  for (int j = 2; j <= n - 1; ++j) {
    x.add(site_word(n, j, Pauli::X) * site_word(n, j + 1, Pauli::X));
    x.add(site_word(n, j, Pauli::Z));
  }
  return x;
}

OperatorSum purity_experiment_state(int n, double coefficient, double zeta) {
  if (n < 3) throw std::invalid_argument("purity experiment state needs N >= 3");
  const OperatorSum id = as_sum(PauliString(n));
  const OperatorSum m = as_sum(parity_operator(n));
  OperatorSum o(n);
  o.add(site_word(n, 1, Pauli::Z));
  o.add(site_word(n, 1, Pauli::Y) * site_word(n, 2, Pauli::X));
  o.add(site_word(n, 1, Pauli::Y) * site_word(n, 3, Pauli::X));
  o.add(site_word(n, 1, Pauli::Z) * site_word(n, 2, Pauli::X) * site_word(n, 3, Pauli::X));
  OperatorSum rho = (id + coefficient * m * o) * (id + zeta * m);
  rho *= std::ldexp(1.0, -n);
  return rho;
}

}  // namespace lmem
