#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lmem {

using cplx = std::complex<double>;

/// Largest chain the symplectic representation can hold.
inline constexpr int kMaxSites = 32;

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// i^k for k taken mod 4.
cplx phase_of(int exponent);

/**
 * Signed N-site Pauli word  i^k * s_1 (x) s_2 (x) ... (x) s_N.
 *
 * Stored in symplectic form: bit (j-1) of x_bits/z_bits describes site j,
 * with X = (1,0), Z = (0,1) and Y = (1,1) (Y itself, not XZ). The phase is
 * an exponent of i taken mod 4, so multiplication is exact.
 */
class PauliString {
 public:
  PauliString() = default;
  /// Identity word on n sites.
  explicit PauliString(int n_sites);
  PauliString(int n_sites, std::uint64_t x_bits, std::uint64_t z_bits, int phase_exponent = 0);

  /// Single-site operator `p` at 1-based `site`.
  static PauliString single(int n_sites, int site, Pauli p);
  /// Dense code string such as "XIZY" (site 1 first).
  static PauliString from_codes(std::string_view codes, int phase_exponent = 0);
  /// Compact text form "+iX1 Y3 Z4@5"; see to_string().
  static PauliString parse(std::string_view text);

  int n_sites() const { return n_sites_; }
  std::uint64_t x_bits() const { return x_; }
  std::uint64_t z_bits() const { return z_; }
  int phase_exponent() const { return phase_; }
  cplx phase() const { return phase_of(phase_); }

  Pauli code(int site) const;
  int weight() const;
  bool is_identity_word() const { return x_ == 0 && z_ == 0; }
  bool is_hermitian() const { return (phase_ & 1) == 0; }

  /// Same word with phase +1.
  PauliString word() const { return {n_sites_, x_, z_, 0}; }
  PauliString with_phase(int exponent) const { return {n_sites_, x_, z_, exponent}; }
  PauliString adjoint() const;

  std::string to_string() const;

  friend auto operator<=>(const PauliString&, const PauliString&) = default;

 private:
  int n_sites_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
  int phase_ = 0;
};

/// Signed product p*q. Throws std::invalid_argument on size mismatch.
PauliString pauli_multiply(const PauliString& p, const PauliString& q);
inline PauliString operator*(const PauliString& p, const PauliString& q) { return pauli_multiply(p, q); }

/// +1 if p and q commute, -1 if they anticommute.
int pauli_commutation_sign(const PauliString& p, const PauliString& q);

/// Maximum n_sites for dense 2^N matrices; LMEM_DENSE_LIMIT overrides the default of 10.
int dense_limit();

/// Tensor product s_1 (x) ... (x) s_N times the phase; site 1 is the most significant bit.
Eigen::MatrixXcd pauli_to_matrix(const PauliString& p);

/**
 * Action of a Pauli word on computational basis states:
 * P|y> = phase(y) |y ^ flip>, with phase(y) = i^base * (-1)^popcount(y & sign_mask).
 * Bit masks refer to the dense matrix index (site 1 most significant).
 */
struct PauliAction {
  std::uint64_t flip = 0;
  std::uint64_t sign_mask = 0;
  int base_exponent = 0;

  explicit PauliAction(const PauliString& p);
  cplx phase(std::uint64_t y) const;
};

/// Finite sum of Pauli words with complex coefficients (phases folded into coefficients).
class OperatorSum {
 public:
  using TermMap = std::map<PauliString, cplx>;

  OperatorSum() = default;
  explicit OperatorSum(int n_sites) : n_sites_(n_sites) {}
  OperatorSum(const PauliString& p, cplx coefficient = 1.0);

  int n_sites() const { return n_sites_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Adds coefficient * p; merges duplicates and drops exact zeros.
  void add(const PauliString& p, cplx coefficient = 1.0);
  cplx coefficient(const PauliString& word) const;

  OperatorSum adjoint() const;
  bool is_hermitian(double tol = 1e-14) const;
  /// Drops terms with |c| <= tol.
  void prune(double tol);

  Eigen::MatrixXcd to_matrix() const;
  std::string to_string() const;

  OperatorSum& operator+=(const OperatorSum& other);
  OperatorSum& operator-=(const OperatorSum& other);
  OperatorSum& operator*=(cplx s);
  friend OperatorSum operator+(OperatorSum a, const OperatorSum& b) { return a += b; }
  friend OperatorSum operator-(OperatorSum a, const OperatorSum& b) { return a -= b; }
  friend OperatorSum operator*(OperatorSum a, cplx s) { return a *= s; }
  friend OperatorSum operator*(cplx s, OperatorSum a) { return a *= s; }
  friend OperatorSum operator*(const OperatorSum& a, const OperatorSum& b);

 private:
  int n_sites_ = 0;
  TermMap terms_;
};

/**
 * Ordered Majorana product  coefficient * w_1^{a_1} w_2^{a_2} ... w_{2N}^{a_{2N}}.
 * Bit (j-1) of `occupation` is a_j.
 */
struct MajoranaMonomial {
  int n_sites = 0;
  std::uint64_t occupation = 0;
  cplx coefficient = 1.0;

  int degree() const;
  /// (w^a)^dagger = hermitian_sign() * w^a.
  int hermitian_sign() const;
};

/// Canonical product of two monomials.
MajoranaMonomial majorana_multiply(const MajoranaMonomial& a, const MajoranaMonomial& b);

/// Sign picked up reordering w^a w^b into canonical order (common factors squared away).
int majorana_reorder_sign(std::uint64_t a, std::uint64_t b);

/**
 * Jordan-Wigner layer  w_{2j-1} = Z_1..Z_{j-1} X_j,  w_{2j} = Z_1..Z_{j-1} Y_j.
 * Returns the Pauli word W_a and exponent e with w^a = i^e W_a.
 */
std::pair<PauliString, int> majorana_word(int n_sites, std::uint64_t occupation);

/// Occupation bits a such that w^a is proportional to the word of p.
std::uint64_t majorana_occupation(const PauliString& p);

MajoranaMonomial spin_to_majorana(const PauliString& p);
OperatorSum majorana_to_spin(const MajoranaMonomial& m);

/// The parity operator (-1)^N prod_j Z_j (phase included).
PauliString parity_operator(int n_sites);

}  // namespace lmem
