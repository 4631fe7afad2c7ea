#include "lmem/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace lmem {

namespace {

void require_length(const std::vector<double>& v, std::size_t n, const char* name) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string("model: '") + name + "' must have length " + std::to_string(n) +
                                ", got " + std::to_string(v.size()));
  }
}

void require_nonnegative(const std::vector<double>& v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0)) {
      throw std::invalid_argument(std::string("model: negative rate ") + name + "[" + std::to_string(i + 1) +
                                  "] = " + std::to_string(v[i]));
    }
  }
}

PauliString xx_bond(int n, int j) {
  return PauliString::single(n, j, Pauli::X) * PauliString::single(n, j + 1, Pauli::X);
}

}  // namespace

ModelParams ModelParams::uniform(int n_sites, double j, double gamma) {
  ModelParams p;
  p.n_sites = n_sites;
  p.couplings.assign(n_sites - 1, j);
  p.dephasing_rates.assign(n_sites, gamma);
  p.field_b.assign(n_sites, 0.0);
  p.bond_dissipation.assign(n_sites - 1, 0.0);
  return p;
}

void ModelParams::validate() const {
  if (n_sites < 2 || n_sites > kMaxSites) throw std::invalid_argument("model: n_sites must be >= 2");
  const auto n = static_cast<std::size_t>(n_sites);
  require_length(couplings, n - 1, "couplings");
  require_length(dephasing_rates, n, "dephasing_rates");
  require_length(field_b, n, "field_b");
  require_length(bond_dissipation, n - 1, "bond_dissipation");
  require_nonnegative(dephasing_rates, "dephasing_rates");
  require_nonnegative(bond_dissipation, "bond_dissipation");
}

bool ModelParams::has_perturbations() const {
  const auto nonzero = [](const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; });
  };
  std::vector<double> interior_b;
  for (int j = 2; j <= n_sites - 1 && j <= static_cast<int>(field_b.size()); ++j) interior_b.push_back(field_b[j - 1]);
  return transverse_u != 0.0 || nonzero(interior_b) || nonzero(bond_dissipation);
}

double ModelParams::mean_gamma() const {
  if (dephasing_rates.empty()) return 0.0;
  return std::accumulate(dephasing_rates.begin(), dephasing_rates.end(), 0.0) /
         static_cast<double>(dephasing_rates.size());
}

ModelParams model_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKnown = {"n_sites",     "couplings",        "dephasing_rates",
                                               "field_b",     "transverse_u",     "bond_dissipation",
                                               "rng_seed",    "bond_prefactor"};
  if (!j.is_object()) throw std::invalid_argument("model: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.count(key)) throw std::invalid_argument("model: unknown field '" + key + "'");
  }
  if (!j.contains("n_sites")) throw std::invalid_argument("model: missing 'n_sites'");
  ModelParams p;
  p.n_sites = j.at("n_sites").get<int>();
  if (p.n_sites < 2) throw std::invalid_argument("model: n_sites must be >= 2");
  const auto n = static_cast<std::size_t>(p.n_sites);
  const auto array_or = [&](const char* key, std::size_t len) {
    return j.contains(key) ? j.at(key).get<std::vector<double>>() : std::vector<double>(len, 0.0);
  };
  if (!j.contains("couplings") || !j.contains("dephasing_rates")) {
    throw std::invalid_argument("model: 'couplings' and 'dephasing_rates' are required");
  }
  p.couplings = j.at("couplings").get<std::vector<double>>();
  p.dephasing_rates = j.at("dephasing_rates").get<std::vector<double>>();
  p.field_b = array_or("field_b", n);
  p.bond_dissipation = array_or("bond_dissipation", n - 1);
  p.transverse_u = j.value("transverse_u", 0.0);
  p.rng_seed = j.value("rng_seed", std::uint64_t{0});
  const std::string mode = j.value("bond_prefactor", std::string("amplitude"));
  if (mode == "amplitude") {
    p.bond_prefactor = BondPrefactor::Amplitude;
  } else if (mode == "rate") {
    p.bond_prefactor = BondPrefactor::Rate;
  } else {
    throw std::invalid_argument("model: bond_prefactor must be 'amplitude' or 'rate'");
  }
  p.validate();
  return p;
}

nlohmann::json model_to_json(const ModelParams& p) {
  return {{"n_sites", p.n_sites},
          {"couplings", p.couplings},
          {"dephasing_rates", p.dephasing_rates},
          {"field_b", p.field_b},
          {"transverse_u", p.transverse_u},
          {"bond_dissipation", p.bond_dissipation},
          {"rng_seed", p.rng_seed},
          {"bond_prefactor", p.bond_prefactor == BondPrefactor::Rate ? "rate" : "amplitude"}};
}

ModelParams random_perturbed_model(int n_sites, std::uint64_t seed, double u) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ModelParams p = ModelParams::uniform(n_sites, 0.0, 0.0);
  p.rng_seed = seed;
  for (auto& x : p.couplings) x = unit(rng);
  for (auto& x : p.field_b) x = unit(rng);
  for (auto& x : p.dephasing_rates) x = unit(rng);
  for (auto& x : p.bond_dissipation) x = unit(rng);
  p.field_b.front() = 0.0;
  p.field_b.back() = 0.0;
  p.transverse_u = u;
  return p;
}

OperatorSum build_hamiltonian(const ModelParams& p) {
  p.validate();
  const int n = p.n_sites;
  OperatorSum h(n);
  for (int j = 1; j < n; ++j) h.add(xx_bond(n, j), p.couplings[j - 1]);
  for (int j = 2; j <= n - 1; ++j) h.add(PauliString::single(n, j, Pauli::Z), p.field_b[j - 1]);
  if (p.transverse_u != 0.0) {
    for (int j = 1; j <= n; ++j) h.add(PauliString::single(n, j, Pauli::X), p.transverse_u);
  }
  return h;
}

std::vector<OperatorSum> build_dissipators(const ModelParams& p) {
  p.validate();
  const int n = p.n_sites;
  std::vector<OperatorSum> out;
  for (int j = 1; j <= n; ++j) {
    const double g = p.dephasing_rates[j - 1];
    if (g > 0.0) out.emplace_back(PauliString::single(n, j, Pauli::Z), std::sqrt(g));
  }
  for (int j = 1; j < n; ++j) {
    const double g = p.bond_dissipation[j - 1];
    if (g > 0.0) out.emplace_back(xx_bond(n, j), p.bond_prefactor == BondPrefactor::Rate ? std::sqrt(g) : g);
  }
  return out;
}

SymmetryReport symmetry_report(const OperatorSum& op, int n_sites) {
  const PauliString x1 = PauliString::single(n_sites, 1, Pauli::X);
  const PauliString xn = PauliString::single(n_sites, n_sites, Pauli::X);
  const PauliString parity = parity_operator(n_sites);
  SymmetryReport r;
  for (const auto& [word, c] : op.terms()) {
    if (word.n_sites() != n_sites) throw std::invalid_argument("symmetry_report: size mismatch");
    const bool a = pauli_commutation_sign(word, x1) == 1;
    const bool b = pauli_commutation_sign(word, xn) == 1;
    const bool m = pauli_commutation_sign(word, parity) == 1;
    r.commutes_sigma1_x &= a;
    r.commutes_sigmaN_x &= b;
    r.commutes_parity &= m;
    if (!(a && b && m)) r.offending_terms.push_back(word);
  }
  return r;
}

bool check_symmetry_preserving(const OperatorSum& op, int n_sites) { return symmetry_report(op, n_sites).all(); }

}  // namespace lmem
