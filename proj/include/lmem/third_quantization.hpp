#pragma once

#include <iosfwd>
#include <string>

#include "lmem/liouville_majorana.hpp"
#include "lmem/model.hpp"

namespace lmem {

/// Liouvillian L acting as i d|rho>>/dt = L |rho>> in the Majorana-monomial basis.
struct Superoperator {
  SparseOp matrix;
  std::string source_tag;  ///< "third-quantized" or "direct-vectorized"
  int n_sites = 0;

  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// Thrown when the closed fermionic form is requested for a perturbed model.
struct UnsupportedModelError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/**
 * L rho = [H, rho] + i sum_k (L_k rho L_k^dagger - {L_k^dagger L_k, rho}/2), assembled column by
 * column from exact Majorana products of the Hamiltonian and jump-operator terms.
 * Columns are processed in parallel (worker_count()).
 */
Superoperator build_liouvillian_direct(const ModelParams& params);

/// Same operator from the quartic c/c^dagger form; requires u = 0, b = 0 and gamma' = 0.
Superoperator build_liouvillian_thirdq(const ModelParams& params);

/// P_j = (2n_{2j}-1)(2n_{2j+1}-1), j in [1, N-1].
SparseOp build_P_operator(int j, int n_sites);

/// Occupation-number operator n_j = c_j^dagger c_j.
SparseOp number_operator(int j, int n_sites);

/// Vector of the identity operator, the left zero mode of every trace-preserving L.
LiouvilleVector identity_vector(int n_sites);

/// Writes "row col re im" lines (0-based) after a "# dim nnz" header.
void write_triplets(std::ostream& os, const SparseOp& m);
SparseOp read_triplets(std::istream& is);

/// Largest |entry| of a - b.
double max_abs_diff(const SparseOp& a, const SparseOp& b);
/// Largest |entry| of the commutator [a, b].
double commutator_norm(const SparseOp& a, const SparseOp& b);

}  // namespace lmem
