#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lmem/third_quantization.hpp"

namespace lmem {

/// Joint eigenvalues p_1..p_{N-1} of the P_j operators.
class SectorLabel {
 public:
  SectorLabel() = default;
  explicit SectorLabel(std::vector<int> p);
  /// "+--+" style text; one character per bond.
  static SectorLabel parse(const std::string& text);
  static SectorLabel all_plus(int n_sites);
  /// Label of the sector containing basis state a.
  static SectorLabel of_index(LiouvilleIndex a, int n_sites);

  int n_sites() const { return static_cast<int>(p_.size()) + 1; }
  int p(int j) const { return p_.at(j - 1); }
  const std::vector<int>& values() const { return p_; }
  std::string to_string() const;
  bool contains(LiouvilleIndex a) const;

  friend bool operator==(const SectorLabel&, const SectorLabel&) = default;

 private:
  std::vector<int> p_;
};

/// All 2^{N-1} labels in lexicographic order of "+" < "-".
std::vector<SectorLabel> all_sector_labels(int n_sites);

/// Basis states of the sector, increasing.
std::vector<LiouvilleIndex> enumerate_sector_basis(const SectorLabel& label, int n_sites);

struct SectorBlock {
  SectorLabel label;
  std::vector<LiouvilleIndex> basis;
  Eigen::MatrixXcd matrix;
};

/// Thrown when a Liouvillian couples different sectors; names the first violated P_j.
struct SectorViolation : std::runtime_error {
  int bond;
  SectorViolation(int j, const std::string& what) : std::runtime_error(what), bond(j) {}
};

/// Largest |entry| connecting basis states with different p_j, per bond (index j-1).
std::vector<double> sector_leakage(const SparseOp& l, int n_sites);

/// Block of L on the sector. Throws SectorViolation if any entry above tol leaks between sectors.
SectorBlock restrict_liouvillian(const Superoperator& l, const SectorLabel& label, double tol = 1e-12);

/// Sum_j iJ_j(p_j-1) kappa_{4j-1} kappa_{4j+2} + sum_j i gamma_j (i kappa_{4j-2} kappa_{4j-1} - 1) on the sector basis.
Eigen::MatrixXcd kitaev_form_reconstruction(const SectorLabel& label, const ModelParams& params,
                                            KappaConvention conv = {});

/// Maximal runs of sites joined by p_j = -1 bonds, as inclusive 1-based site ranges.
std::vector<std::pair<int, int>> broken_chain_segments(const SectorLabel& label);

/// Subchain on sites [first, last]: dissipative pairs plus hopping on the broken bonds, dimension 2^{len}.
Eigen::MatrixXcd segment_matrix(int first, int last, const ModelParams& params);
std::vector<cplx> segment_spectrum(int first, int last, const ModelParams& params);

/// Block spectrum assembled from independent segments (each sum appears twice for the free edge pair).
std::vector<cplx> composed_block_spectrum(const SectorLabel& label, const ModelParams& params);

/// Eigenvalues of a dense matrix.
std::vector<cplx> eigenvalues_of(const Eigen::MatrixXcd& m);

/// Largest distance after greedily matching two eigenvalue lists; infinity if sizes differ.
double spectrum_mismatch(std::vector<cplx> a, std::vector<cplx> b);

/// Sort by (imag, real).
void sort_spectrum(std::vector<cplx>& v);

/// CSV rows "label,index,re,im" (header written when requested).
void write_spectrum_csv(std::ostream& os, const SectorLabel& label, const std::vector<cplx>& eigenvalues,
                        bool header);

}  // namespace lmem
