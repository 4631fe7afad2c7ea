#pragma once

#include <string>
#include <vector>

#include "lmem/liouville_space.hpp"

namespace lmem {

/**
 * Monomial (signed permutation) operator on Liouville space:
 * |a>> -> factor[a] |target[a]>>. Products of c_j + c_j^dagger, i(c_j^dagger - c_j)
 * and occupation parities stay in this class, which keeps every kappa and
 * Liouville-spin operator O(4^N) to store and apply.
 */
class MonomialOp {
 public:
  MonomialOp() = default;
  static MonomialOp identity(int n_sites);

  int n_sites() const { return n_sites_; }
  std::size_t dim() const { return target_.size(); }
  LiouvilleIndex target(LiouvilleIndex a) const { return target_[a]; }
  cplx factor(LiouvilleIndex a) const { return factor_[a]; }

  /// (this * rhs)|a>> = this(rhs|a>>).
  MonomialOp operator*(const MonomialOp& rhs) const;
  MonomialOp& operator*=(cplx s);
  friend MonomialOp operator*(cplx s, MonomialOp op) { return op *= s; }

  LiouvilleVector apply(const LiouvilleVector& v) const;
  SparseOp to_sparse() const;

 private:
  friend MonomialOp make_monomial(int, std::vector<LiouvilleIndex>, std::vector<cplx>);
  int n_sites_ = 0;
  std::vector<LiouvilleIndex> target_;
  std::vector<cplx> factor_;
};

MonomialOp make_monomial(int n_sites, std::vector<LiouvilleIndex> target, std::vector<cplx> factor);

/// Left multiplication rho -> w_j rho, which equals c_j + c_j^dagger.
MonomialOp majorana_left(int j, int n_sites);
/// Right multiplication rho -> rho w_j, which equals (c_j^dagger - c_j) times the total parity.
MonomialOp majorana_right(int j, int n_sites);
/// Total fermion parity (-1)^{sum a}.
MonomialOp parity_op(int n_sites);

enum class LiouvilleOpKind { C, CDagger, Kappa, P, X, Y, Z };

/// A named operator on Liouville space with its index range checked against N.
struct LiouvilleOperatorIndex {
  LiouvilleOpKind kind;
  int site;

  /// Throws std::out_of_range when the index is outside the range for `kind`.
  void validate(int n_sites) const;
  std::string to_string() const;
};

/// Options for the kappa construction; flip_odd_sign is a mutation switch for the oracle suite.
struct KappaConvention {
  bool flip_odd_sign = false;
};

/// Liouville-spin operators X_k, Y_k, Z_k, k in [1, 2N], built from c_k, c_k^dagger (JW-I).
MonomialOp liouville_spin(LiouvilleOpKind kind, int k, int n_sites);

/**
 * kappa_{2i-1} = -(X_1 ... X_{i-1}) Z_i and kappa_{2i} = (X_1 ... X_{i-1}) Y_i,
 * with the Liouville spins of liouville_spin(), i in [1, 2N].
 */
MonomialOp kappa_monomial(int k, int n_sites, KappaConvention conv = {});
SparseOp kappa_as_liouville_matrix(int k, int n_sites, KappaConvention conv = {});

/// Sparse matrix of any indexed operator (c, c^dagger, kappa, P, X, Y, Z).
SparseOp liouville_operator_matrix(const LiouvilleOperatorIndex& op, int n_sites, KappaConvention conv = {});

/// Eigenvalue of P_j = (2n_{2j}-1)(2n_{2j+1}-1) on basis state a: +1 iff a_{2j} == a_{2j+1}.
constexpr int p_eigenvalue(LiouvilleIndex a, int j) {
  return occupation(a, 2 * j) == occupation(a, 2 * j + 1) ? 1 : -1;
}

}  // namespace lmem
