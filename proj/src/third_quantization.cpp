#include "lmem/third_quantization.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "lmem/parallel.hpp"

namespace lmem {

namespace {

using Terms = std::vector<MajoranaMonomial>;

Terms to_monomials(const OperatorSum& op) {
  Terms out;
  for (const auto& [word, c] : op.terms()) {
    MajoranaMonomial m = spin_to_majorana(word);
    m.coefficient *= c;
    out.push_back(m);
  }
  return out;
}

Terms adjoint_terms(const Terms& t) {
  Terms out = t;
  for (auto& m : out) m.coefficient = std::conj(m.coefficient) * static_cast<double>(m.hermitian_sign());
  return out;
}

// Merge a product of sums into canonical monomials.
Terms multiply_terms(const Terms& a, const Terms& b) {
  std::map<std::uint64_t, cplx> acc;
  for (const auto& x : a) {
    for (const auto& y : b) {
      const MajoranaMonomial m = majorana_multiply(x, y);
      acc[m.occupation] += m.coefficient;
    }
  }
  Terms out;
  for (const auto& [occ, c] : acc) {
    if (c != cplx{}) out.push_back({a.empty() ? 0 : a.front().n_sites, occ, c});
  }
  return out;
}

struct Dissipator {
  Terms l, l_dag, l_dag_l;
};

double sign_of(std::uint64_t a, std::uint64_t b) { return static_cast<double>(majorana_reorder_sign(a, b)); }

SparseOp from_triplets(std::size_t dim, std::vector<Eigen::Triplet<cplx>>& trips) {
  SparseOp m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(cplx{0.0});
  return m;
}

}  // namespace

Superoperator build_liouvillian_direct(const ModelParams& params) {
  const int n = params.n_sites;
  const std::size_t dim = liouville_dim(n);
  const Terms h = to_monomials(build_hamiltonian(params));
  std::vector<Dissipator> ds;
  for (const auto& l : build_dissipators(params)) {
    Dissipator d;
    d.l = to_monomials(l);
    d.l_dag = adjoint_terms(d.l);
    d.l_dag_l = multiply_terms(d.l_dag, d.l);
    ds.push_back(std::move(d));
  }

  const std::size_t workers = static_cast<std::size_t>(worker_count());
  std::vector<std::vector<Eigen::Triplet<cplx>>> parts(std::max<std::size_t>(workers, 1));
  std::atomic<std::size_t> next_part{0};
  const cplx I{0.0, 1.0};

  parallel_chunks(dim, [&](std::size_t lo, std::size_t hi) {
    std::vector<Eigen::Triplet<cplx>> local;
    std::unordered_map<std::uint64_t, cplx> col;
    for (std::size_t ai = lo; ai < hi; ++ai) {
      const auto a = static_cast<std::uint64_t>(ai);
      col.clear();
      for (const auto& m : h) {
        const double s = sign_of(m.occupation, a) - sign_of(a, m.occupation);
        if (s != 0.0) col[m.occupation ^ a] += m.coefficient * s;
      }
      for (const auto& d : ds) {
        for (const auto& x : d.l) {
          const double sx = sign_of(x.occupation, a);
          const std::uint64_t xa = x.occupation ^ a;
          for (const auto& y : d.l_dag) {
            col[xa ^ y.occupation] += I * x.coefficient * y.coefficient * sx * sign_of(xa, y.occupation);
          }
        }
        for (const auto& m : d.l_dag_l) {
          const double s = sign_of(m.occupation, a) + sign_of(a, m.occupation);
          col[m.occupation ^ a] -= 0.5 * I * m.coefficient * s;
        }
      }
      for (const auto& [row, v] : col) {
        if (v != cplx{}) local.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(a), v);
      }
    }
    parts[next_part++] = std::move(local);
  });

  std::vector<Eigen::Triplet<cplx>> trips;
  for (auto& p : parts) trips.insert(trips.end(), p.begin(), p.end());
  return {from_triplets(dim, trips), "direct-vectorized", n};
}

SparseOp number_operator(int j, int n_sites) { return SparseOp(c_dagger_matrix(j, n_sites) * c_matrix(j, n_sites)); }

Superoperator build_liouvillian_thirdq(const ModelParams& params) {
  params.validate();
  if (params.has_perturbations()) {
    throw UnsupportedModelError(
        "third-quantized Liouvillian covers only the unperturbed chain (u = 0, b = 0, gamma' = 0)");
  }
  const int n = params.n_sites;
  const SparseOp id = identity_op(n);
  SparseOp l(id.rows(), id.cols());
  const cplx I{0.0, 1.0};
  for (int j = 1; j < n; ++j) {
    const double jj = params.couplings[j - 1];
    if (jj == 0.0) continue;
    const SparseOp hop = SparseOp(c_dagger_matrix(2 * j, n) * c_matrix(2 * j + 1, n)) +
                         SparseOp(c_matrix(2 * j, n) * c_dagger_matrix(2 * j + 1, n));
    l += (-2.0 * I * jj) * hop;
  }
  for (int j = 1; j <= n; ++j) {
    const double g = params.dephasing_rates[j - 1];
    if (g == 0.0) continue;
    const SparseOp a = 2.0 * number_operator(2 * j - 1, n) - id;
    const SparseOp b = 2.0 * number_operator(2 * j, n) - id;
    l += (I * g) * (SparseOp(a * b) - id);
  }
  l.prune(cplx{0.0});
  return {l, "third-quantized", n};
}

SparseOp build_P_operator(int j, int n_sites) {
  if (j < 1 || j > n_sites - 1) {
    throw std::out_of_range("P_" + std::to_string(j) + ": index outside [1, " + std::to_string(n_sites - 1) + "]");
  }
  const SparseOp id = identity_op(n_sites);
  const SparseOp a = 2.0 * number_operator(2 * j, n_sites) - id;
  const SparseOp b = 2.0 * number_operator(2 * j + 1, n_sites) - id;
  return SparseOp(a * b);
}

LiouvilleVector identity_vector(int n_sites) { return LiouvilleVector::basis(n_sites, 0); }

void write_triplets(std::ostream& os, const SparseOp& m) {
  os << "# " << m.rows() << " " << m.nonZeros() << "\n";
  os.precision(17);
  os << std::scientific;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseOp::InnerIterator it(m, r); it; ++it) {
      os << it.row() << " " << it.col() << " " << it.value().real() << " " << it.value().imag() << "\n";
    }
  }
}

SparseOp read_triplets(std::istream& is) {
  std::string hash;
  Eigen::Index dim = 0, nnz = 0;
  if (!(is >> hash >> dim >> nnz) || hash != "#") throw std::runtime_error("read_triplets: bad header");
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(static_cast<std::size_t>(nnz));
  Eigen::Index r = 0, c = 0;
  double re = 0, im = 0;
  while (is >> r >> c >> re >> im) trips.emplace_back(r, c, cplx{re, im});
  if (static_cast<Eigen::Index>(trips.size()) != nnz) throw std::runtime_error("read_triplets: entry count mismatch");
  SparseOp m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

double max_abs_diff(const SparseOp& a, const SparseOp& b) {
  const SparseOp d = a - b;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < d.nonZeros(); ++k) worst = std::max(worst, std::abs(d.valuePtr()[k]));
  return worst;
}

double commutator_norm(const SparseOp& a, const SparseOp& b) {
  const SparseOp ab = SparseOp(a * b);
  const SparseOp ba = SparseOp(b * a);
  return max_abs_diff(ab, ba);
}

}  // namespace lmem
