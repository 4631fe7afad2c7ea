#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lmem/sectors.hpp"

namespace lmem {

enum class EvolutionMethod { Integrator, EigenExpansion };
std::string to_string(EvolutionMethod m);
EvolutionMethod evolution_method_from_string(const std::string& s);

struct NonPhysicalStateError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct IntegratorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// n_samples equally spaced times in [0, t_max], both ends included.
std::vector<double> uniform_grid(double t_max, int n_samples);

struct EvolveOptions {
  EvolutionMethod method = EvolutionMethod::Integrator;
  double atol = 1e-10;
  double rtol = 1e-8;
  long max_steps = 50'000'000;
  /// Evolve only on the smallest L-invariant subspace containing the initial support.
  bool reduce = true;
  /// Largest invariant component the eigen-expansion method diagonalizes densely.
  std::size_t eigen_max_dim = 4096;
  bool store_states = true;
};

using EvolutionObserver = std::function<void(std::size_t sample, double t, const LiouvilleVector& rho)>;

struct EvolutionResult {
  std::vector<double> times;
  std::vector<LiouvilleVector> states;  ///< empty unless store_states
  std::string method_tag;
  std::size_t subspace_dim = 0;
  std::size_t components = 0;
  long steps_accepted = 0;
  long steps_rejected = 0;
};

/// Smallest index set containing `support` and closed under the sparsity pattern of l,
/// split into weakly connected pieces (each piece is L-invariant).
std::vector<std::vector<LiouvilleIndex>> invariant_components(const SparseOp& l,
                                                              const std::vector<LiouvilleIndex>& support);

/// i d|rho>>/dt = L|rho>> sampled on `times` (increasing, starting at or after 0).
EvolutionResult evolve(const LiouvilleVector& rho0, const Superoperator& l, const std::vector<double>& times,
                       const EvolveOptions& opts = {}, const EvolutionObserver& observer = {});

/// Dense-state entry point: checks rho0 is a unit-trace PSD matrix (tol 1e-10) and builds L.
EvolutionResult evolve(const Eigen::MatrixXcd& rho0, const ModelParams& model, const std::vector<double>& times,
                       const EvolveOptions& opts = {}, const EvolutionObserver& observer = {});

/// Picks the third-quantized form for unperturbed models and the direct form otherwise.
Superoperator build_liouvillian(const ModelParams& model);

/// Precomputed linear functional rho -> tr(X rho) on Liouville vectors.
class ObservableProbe {
 public:
  ObservableProbe() = default;
  explicit ObservableProbe(const OperatorSum& x);
  cplx operator()(const LiouvilleVector& rho) const;

 private:
  std::vector<std::pair<LiouvilleIndex, cplx>> weights_;
};

/// tr(X rho) from a dense matrix.
cplx expectation(const OperatorSum& x, const Eigen::MatrixXcd& rho);
/// <<X^dagger|rho>> via the Liouville inner product.
cplx expectation(const OperatorSum& x, const LiouvilleVector& rho);

struct PhysicalityReport {
  double trace_error = 0.0;        ///< |tr rho - 1|
  double hermiticity_error = 0.0;  ///< max |rho - rho^dagger| entry
  double min_eigenvalue = 0.0;     ///< of the Hermitian part
  bool ok(double tol = 1e-8) const {
    return trace_error < tol && hermiticity_error < tol && min_eigenvalue > -tol;
  }
};

PhysicalityReport physicality(const Eigen::MatrixXcd& rho);
PhysicalityReport physicality(const LiouvilleVector& rho);

/// Running worst case over a trajectory.
struct PhysicalityTracker {
  PhysicalityReport worst{0.0, 0.0, 1.0};
  std::size_t samples = 0;
  void add(const PhysicalityReport& r);
  bool ok(double tol = 1e-8) const { return samples > 0 && worst.ok(tol); }
};

struct SpectrumReport {
  std::vector<cplx> eigenvalues;
  std::vector<std::pair<std::size_t, std::size_t>> pairing;  ///< (i, j) with lambda_j = -conj(lambda_i)
  std::size_t unpaired = 0;
  double max_imag = 0.0;
  double max_decaying_trace = 0.0;  ///< over eigenmatrices with Im lambda < -1e-9, unit Hilbert-Schmidt norm
  std::size_t stationary_count = 0; ///< |lambda| < zero_tol
  std::vector<bool> defect_flags;   ///< near-degenerate with nearly parallel eigenvectors

  bool pairing_complete() const { return unpaired == 0; }
};

struct SpectrumOptions {
  double pair_tol = 1e-9;
  double zero_tol = 1e-9;
  double decay_threshold = 1e-9;
  double degeneracy_tol = 1e-6;
  double parallel_tol = 1e-6;
};

/// Spectrum of a dense block whose columns are the Liouville basis states `basis` (all states if empty).
SpectrumReport spectrum_analysis(const Eigen::MatrixXcd& m, const std::vector<LiouvilleIndex>& basis, int n_sites,
                                 const SpectrumOptions& opts = {});

struct EPScanOptions {
  double gamma_min = 0.1;
  double gamma_max = 4.0;
  int n_points = 40;
  SectorLabel sector;
  double gap_tol = 1e-6;
  double condition_threshold = 1e6;
  bool refine = true;
};

struct EPScanRow {
  double gamma = 0.0;
  std::vector<cplx> eigenvalues;  ///< block eigenvalues, sorted by (imag, real)
  double min_gap = 0.0;           ///< within hopping segments
  double condition = 1.0;         ///< worst segment eigenvector-matrix condition number
  bool defective = false;
};

struct EPScanResult {
  std::vector<EPScanRow> rows;
  std::optional<double> refined_gamma;  ///< golden-section minimum of min_gap near the grid minimum
  double refined_min_gap = 0.0;
  double refined_condition = 1.0;
};

/// Homogeneous dephasing gamma swept over gamma_min + (gamma_max - gamma_min) i / (n - 1).
EPScanResult exceptional_point_scan(const ModelParams& base, const EPScanOptions& opts);

/// Smallest pairwise eigenvalue distance and eigenvector condition number of a dense matrix.
std::pair<double, double> gap_and_condition(const Eigen::MatrixXcd& m);

}  // namespace lmem
