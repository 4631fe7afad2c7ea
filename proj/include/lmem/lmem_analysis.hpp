#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmem/dynamics.hpp"

namespace lmem {

enum class EdgeCategory { A, B, C, D };
char to_char(EdgeCategory c);

/// Commutation signs of a Pauli word against M X_1 X_N (delta) and X_N (gamma).
struct EdgeClassification {
  int delta = 1;
  int gamma = 1;
  EdgeCategory category = EdgeCategory::A;
};

/// Thrown for words that anticommute with the parity M (no Hermitian product-state role).
struct ClassificationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The reference word M X_1 X_N.
PauliString edge_reference_word(int n_sites);

EdgeClassification classify_operator(const PauliString& o);
EdgeCategory category_of(int delta, int gamma);

/// Left and right multiplication by a Pauli word as signed permutations of the Majorana basis.
MonomialOp pauli_left(const PauliString& p);
MonomialOp pauli_right(const PauliString& p);

struct ProductTerm {
  double coefficient = 0.0;
  PauliString op;
};

/**
 * rho = [(I + sum a A + sum c C M)(I + zeta M) - (sum b B M + sum d D)(I - zeta M)] / 2^N.
 * Each operator must be a Hermitian word commuting with M and of the list's category.
 */
struct ProductStateSpec {
  double zeta = 0.0;
  std::vector<ProductTerm> a_terms, b_terms, c_terms, d_terms;

  void validate(int n_sites) const;
};

struct NonPositiveStateError : std::invalid_argument {
  double min_eigenvalue;
  NonPositiveStateError(double ev, const std::string& what) : std::invalid_argument(what), min_eigenvalue(ev) {}
};

/// Cheap sufficient condition for positivity (triangle-inequality bound on both brackets).
bool positivity_precheck(const ProductStateSpec& spec);

/// The state as an exact Pauli sum (no dense matrices).
OperatorSum product_state_operator(const ProductStateSpec& spec, int n_sites);

/// Dense product state; rejects min eigenvalue < -1e-10 with NonPositiveStateError.
Eigen::MatrixXcd build_product_state(const ProductStateSpec& spec, int n_sites);
/// Liouville vector of the same state; positivity is checked densely when N <= dense_limit().
LiouvilleVector build_product_state_vector(const ProductStateSpec& spec, int n_sites);

/// Edge-mode superoperator K(rho) = M X_1 X_N rho X_N X_1, which is i kappa_1 kappa_4N.
MonomialOp edge_parity_op(int n_sites);

struct EdgeFactorization {
  bool factorized = false;
  double a = 0.0;         ///< edge-occupied amplitude, a >= 0, a^2 + b^2 = 1
  double b = 0.0;         ///< edge-empty amplitude
  double residual = 0.0;  ///< |rho_1 - r kappa_1 rho_0| relative to |rho|
  double contrast() const { return a * a - b * b; }
};

/// Splits rho into edge-occupied/empty parts and tests whether their bulk factors are parallel.
EdgeFactorization edge_factorization_test(const LiouvilleVector& rho, double tol = 1e-8);
EdgeFactorization edge_factorization_test(const Eigen::MatrixXcd& rho, double tol = 1e-8);

struct RatioSample {
  double t = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double ratio = 0.0;    ///< NaN when guarded
  bool guarded = false;  ///< |<X2>| below the guard
};

struct RatioSeries {
  std::vector<RatioSample> samples;
  /// max_t |ratio(t) - ratio(0)| over unguarded samples; infinity if the first sample is guarded.
  double max_deviation() const;
  std::size_t guarded_count() const;
  bool constant(double tol) const { return max_deviation() < tol; }
};

/// Guard below which <X2> is at the round-off floor: max(1e-12, 1e-9 |<X2>(0)|).
double ratio_guard(double x2_initial);
RatioSample ratio_sample(const ObservableProbe& x1, const ObservableProbe& x2, double t, const LiouvilleVector& rho,
                         double guard = 1e-12);
RatioSeries ratio_trace(const OperatorSum& x1, const OperatorSum& x2, const EvolutionResult& evolution);

/// Closed-form <O>/<O M> on product states:
/// (delta + gamma + delta zeta (delta - gamma)) / (delta - gamma + delta zeta (delta + gamma)).
double predicted_ratio(const EdgeClassification& c, double zeta);

/// <<rho| i kappa_1 kappa_4N |rho>> from tr(rho K(rho)).
double kappa_correlation(const Eigen::MatrixXcd& rho);
/// The same quadratic form through the kappa superoperators.
double kappa_correlation(const LiouvilleVector& rho);

double purity(const Eigen::MatrixXcd& rho);
double purity(const LiouvilleVector& rho);
/// sum |<O>|^2 / 2^N over the given words.
double purity_from_observables(const LiouvilleVector& rho, const std::vector<PauliString>& set);
double purity_from_observables(const Eigen::MatrixXcd& rho, const std::vector<PauliString>& set);
/// All 4^N Pauli words.
std::vector<PauliString> full_pauli_set(int n_sites);

/// {I, M, Y1X2, Z1} and the same words times M.
std::vector<PauliString> long_time_observable_set(int n_sites);

struct LongTimeObservables {
  double zeta = 0.0;  ///< <M>
  double z1 = 0.0;    ///< <Z_1>
  double y1x2 = 0.0;  ///< <Y_1 X_2>
};
LongTimeObservables long_time_observables(const LiouvilleVector& rho);

/// (1 + zeta^2)(1 + <Z1>^2 + <Y1X2>^2) / 2^N.
double approx_purity_longtime(const LiouvilleVector& rho);
/// zeta (1 + <Z1>^2 + <Y1X2>^2) / 2^{N-1}.
double approx_kappa_correlation_longtime(const LiouvilleVector& rho);

/// Detection-experiment states and observables.
ProductStateSpec detection_state_spec(int n_sites, double coefficient = 0.2, double zeta = 0.5);
/// (I + 0.1 sum X_j X_{j+1})(I + 0.5 M)/2^N + 0.1 Z_site (I - 0.5 M)/2^N.
OperatorSum detection_nonproduct_state(int n_sites, int z_site = 1);
OperatorSum detection_observable(int n_sites);  ///< sum_{j=2}^{N-1} (X_j X_{j+1} + Z_j)
/// [I + 0.3 M (Z1 + Y1X2 + Y1X3 + Z1X2X3)](I + 0.4 M) / 2^N.
OperatorSum purity_experiment_state(int n_sites, double coefficient = 0.3, double zeta = 0.4);

}  // namespace lmem
