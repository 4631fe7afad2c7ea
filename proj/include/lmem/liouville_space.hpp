#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "lmem/pauli_algebra.hpp"

namespace lmem {

using SparseOp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using LiouvilleIndex = std::uint32_t;

/// Largest N for which 4^N Liouville indices are addressable here.
inline constexpr int kMaxLiouvilleSites = 12;

/// 4^N.
std::size_t liouville_dim(int n_sites);

/// Bit j-1 of a Liouville index is the occupation a_j of w_j.
constexpr int occupation(LiouvilleIndex a, int mode) { return static_cast<int>((a >> (mode - 1)) & 1U); }

/**
 * Operator rho = sum_a amplitude[a] * w^{a} in the Majorana-canonical basis.
 * The Liouville inner product is <<A|B>> = tr(A^dagger B) = 2^N * sum conj(A_a) B_a.
 */
struct LiouvilleVector {
  int n_sites = 0;
  Eigen::VectorXcd amplitudes;

  LiouvilleVector() = default;
  explicit LiouvilleVector(int n);
  LiouvilleVector(int n, Eigen::VectorXcd amps);

  std::size_t dim() const { return static_cast<std::size_t>(amplitudes.size()); }
  static LiouvilleVector basis(int n, LiouvilleIndex a);
};

/// <<A|B>> = tr(A^dagger B).
cplx liouville_inner(const LiouvilleVector& a, const LiouvilleVector& b);

/// Fermionic action on one basis state: target index and sign, or nothing if annihilated.
struct BasisImage {
  LiouvilleIndex index;
  double sign;
};

/// c_j^dagger |w^a>> = delta_{a_j,0} (-1)^{sum_{k<j} a_k} |w^{a + e_j}>>, j in [1, 2N].
std::optional<BasisImage> c_dagger_on_basis(int j, LiouvilleIndex a, int n_sites);
/// c_j |w^a>> = delta_{a_j,1} (-1)^{sum_{k<j} a_k} |w^{a - e_j}>>.
std::optional<BasisImage> c_on_basis(int j, LiouvilleIndex a, int n_sites);

LiouvilleVector apply_c(int j, const LiouvilleVector& v);
LiouvilleVector apply_c_dagger(int j, const LiouvilleVector& v);

/// Sparse 4^N matrices of c_j and c_j^dagger.
SparseOp c_matrix(int j, int n_sites);
SparseOp c_dagger_matrix(int j, int n_sites);
SparseOp identity_op(int n_sites);

/// Coefficients c_a = tr((w^a)^dagger rho) / 2^N of a dense 2^N x 2^N operator.
LiouvilleVector vectorize(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd devectorize(const LiouvilleVector& v);

/// Vector of a Pauli-sum operator, without going through dense matrices.
LiouvilleVector vectorize(const OperatorSum& op);

/// Vector of rho^dagger: conj(c_a) times the sign of (w^a)^dagger = +-w^a.
LiouvilleVector hermitian_conjugate(const LiouvilleVector& v);

/// Sign s_a with (w^a)^dagger = s_a w^a.
int basis_hermitian_sign(LiouvilleIndex a);

}  // namespace lmem
