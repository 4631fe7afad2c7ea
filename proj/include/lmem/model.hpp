#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmem/pauli_algebra.hpp"

namespace lmem {

/// How the bond-dissipator prefactor gamma'_j enters L'_j.
enum class BondPrefactor {
  Amplitude,  ///< L'_j = gamma'_j X_j X_{j+1}; effective rate gamma'^2.
  Rate,       ///< L'_j = sqrt(gamma'_j) X_j X_{j+1}.
};

struct ModelParams {
  int n_sites = 2;
  std::vector<double> couplings;          ///< J_j, length N-1
  std::vector<double> dephasing_rates;    ///< gamma_j, length N; L_j = sqrt(gamma_j) Z_j
  std::vector<double> field_b;            ///< b_j, length N; only 2..N-1 enter H
  double transverse_u = 0.0;
  std::vector<double> bond_dissipation;   ///< gamma'_j, length N-1
  std::uint64_t rng_seed = 0;
  BondPrefactor bond_prefactor = BondPrefactor::Amplitude;

  /// Homogeneous unperturbed chain.
  static ModelParams uniform(int n_sites, double j, double gamma);

  /// Throws std::invalid_argument on bad lengths or negative rates.
  void validate() const;

  bool has_perturbations() const;
  /// Mean dephasing rate, used as the 1/gamma time unit.
  double mean_gamma() const;
};

/// Strict JSON reader: unknown keys and missing mandatory keys are errors.
ModelParams model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelParams& p);

/// Random {J_j, b_j, gamma_j, gamma'_j} uniform in [0, 1) drawn from `seed`; u given explicitly.
ModelParams random_perturbed_model(int n_sites, std::uint64_t seed, double u);

OperatorSum build_hamiltonian(const ModelParams& p);
std::vector<OperatorSum> build_dissipators(const ModelParams& p);

/// Commutation of an operator with each generator of the edge symmetry.
struct SymmetryReport {
  bool commutes_sigma1_x = true;
  bool commutes_sigmaN_x = true;
  bool commutes_parity = true;
  std::vector<PauliString> offending_terms;

  bool all() const { return commutes_sigma1_x && commutes_sigmaN_x && commutes_parity; }
};

SymmetryReport symmetry_report(const OperatorSum& op, int n_sites);
bool check_symmetry_preserving(const OperatorSum& op, int n_sites);

}  // namespace lmem
