#include "lmem/sectors.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace lmem {

SectorLabel::SectorLabel(std::vector<int> p) : p_(std::move(p)) {
  for (int v : p_) {
    if (v != 1 && v != -1) throw std::invalid_argument("SectorLabel: entries must be +1 or -1");
  }
}

SectorLabel SectorLabel::parse(const std::string& text) {
  std::vector<int> p;
  for (char c : text) {
    if (c == '+') {
      p.push_back(1);
    } else if (c == '-') {
      p.push_back(-1);
    } else {
      throw std::invalid_argument("SectorLabel: bad character in '" + text + "'");
    }
  }
  if (p.empty()) throw std::invalid_argument("SectorLabel: empty label");
  return SectorLabel(std::move(p));
}

SectorLabel SectorLabel::all_plus(int n_sites) { return SectorLabel(std::vector<int>(n_sites - 1, 1)); }

SectorLabel SectorLabel::of_index(LiouvilleIndex a, int n_sites) {
  std::vector<int> p(n_sites - 1);
  for (int j = 1; j < n_sites; ++j) p[j - 1] = p_eigenvalue(a, j);
  return SectorLabel(std::move(p));
}

std::string SectorLabel::to_string() const {
  std::string s;
  for (int v : p_) s += v > 0 ? '+' : '-';
  return s;
}

bool SectorLabel::contains(LiouvilleIndex a) const {
  for (int j = 1; j < n_sites(); ++j) {
    if (p_eigenvalue(a, j) != p_[j - 1]) return false;
  }
  return true;
}

std::vector<SectorLabel> all_sector_labels(int n_sites) {
  const int bonds = n_sites - 1;
  std::vector<SectorLabel> out;
  for (std::uint32_t m = 0; m < (1U << bonds); ++m) {
    std::vector<int> p(bonds);
    for (int j = 0; j < bonds; ++j) p[j] = ((m >> (bonds - 1 - j)) & 1U) ? -1 : 1;
    out.emplace_back(std::move(p));
  }
  return out;
}

std::vector<LiouvilleIndex> enumerate_sector_basis(const SectorLabel& label, int n_sites) {
  if (label.n_sites() != n_sites) throw std::invalid_argument("enumerate_sector_basis: label length mismatch");
  const std::size_t dim = liouville_dim(n_sites);
  std::vector<LiouvilleIndex> out;
  out.reserve(dim >> (n_sites - 1));
  for (LiouvilleIndex a = 0; a < dim; ++a) {
    if (label.contains(a)) out.push_back(a);
  }
  return out;
}

std::vector<double> sector_leakage(const SparseOp& l, int n_sites) {
  std::vector<double> worst(n_sites - 1, 0.0);
  for (Eigen::Index r = 0; r < l.outerSize(); ++r) {
    for (SparseOp::InnerIterator it(l, r); it; ++it) {
      const auto row = static_cast<LiouvilleIndex>(it.row());
      const auto col = static_cast<LiouvilleIndex>(it.col());
      for (int j = 1; j < n_sites; ++j) {
        if (p_eigenvalue(row, j) != p_eigenvalue(col, j)) worst[j - 1] = std::max(worst[j - 1], std::abs(it.value()));
      }
    }
  }
  return worst;
}

SectorBlock restrict_liouvillian(const Superoperator& l, const SectorLabel& label, double tol) {
  const int n = l.n_sites;
  const auto leak = sector_leakage(l.matrix, n);
  for (int j = 1; j < n; ++j) {
    if (leak[j - 1] > tol) {
      throw SectorViolation(j, "Liouvillian does not commute with P_" + std::to_string(j) + " (leakage " +
                                   std::to_string(leak[j - 1]) + ")");
    }
  }
  SectorBlock block{label, enumerate_sector_basis(label, n), {}};
  const auto size = static_cast<Eigen::Index>(block.basis.size());
  block.matrix = Eigen::MatrixXcd::Zero(size, size);
  for (Eigen::Index r = 0; r < size; ++r) {
    for (SparseOp::InnerIterator it(l.matrix, block.basis[r]); it; ++it) {
      const auto col = static_cast<LiouvilleIndex>(it.col());
      const auto pos = std::lower_bound(block.basis.begin(), block.basis.end(), col);
      block.matrix(r, pos - block.basis.begin()) = it.value();
    }
  }
  return block;
}

Eigen::MatrixXcd kitaev_form_reconstruction(const SectorLabel& label, const ModelParams& params,
                                            KappaConvention conv) {
  params.validate();
  const int n = params.n_sites;
  if (label.n_sites() != n) throw std::invalid_argument("kitaev_form_reconstruction: label length mismatch");
  const cplx I{0.0, 1.0};
  std::vector<MonomialOp> kappa;
  for (int k = 1; k <= 4 * n; ++k) kappa.push_back(kappa_monomial(k, n, conv));
  const auto k = [&](int idx) -> const MonomialOp& { return kappa[idx - 1]; };

  std::vector<std::pair<cplx, MonomialOp>> terms;
  for (int j = 1; j < n; ++j) {
    const double coupling = params.couplings[j - 1] * (label.p(j) - 1);
    if (coupling != 0.0) terms.emplace_back(I * coupling, k(4 * j - 1) * k(4 * j + 2));
  }
  cplx shift{};
  for (int j = 1; j <= n; ++j) {
    const double g = params.dephasing_rates[j - 1];
    if (g == 0.0) continue;
    terms.emplace_back(I * g * I, k(4 * j - 2) * k(4 * j - 1));
    shift -= I * g;
  }

  const auto basis = enumerate_sector_basis(label, n);
  const auto size = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd m = shift * Eigen::MatrixXcd::Identity(size, size);
  for (Eigen::Index c = 0; c < size; ++c) {
    for (const auto& [coef, op] : terms) {
      const LiouvilleIndex t = op.target(basis[c]);
      const auto pos = std::lower_bound(basis.begin(), basis.end(), t);
      if (pos == basis.end() || *pos != t) {
        throw std::logic_error("kitaev_form_reconstruction: term leaves the sector");
      }
      m(pos - basis.begin(), c) += coef * op.factor(basis[c]);
    }
  }
  return m;
}

std::vector<std::pair<int, int>> broken_chain_segments(const SectorLabel& label) {
  std::vector<std::pair<int, int>> out;
  int start = 1;
  for (int j = 1; j <= label.n_sites(); ++j) {
    const bool joined = j < label.n_sites() && label.p(j) == -1;
    if (!joined) {
      out.emplace_back(start, j);
      start = j + 1;
    }
  }
  return out;
}

Eigen::MatrixXcd segment_matrix(int first, int last, const ModelParams& params) {
  params.validate();
  if (first < 1 || last > params.n_sites || first > last) throw std::out_of_range("segment_matrix: bad site range");
  const int len = last - first + 1;
  const int dim = 1 << len;
  // Majoranas mu_1..mu_{2 len} on len qubits, site 1 most significant.
  const auto mu = [&](int k) {
    const int q = (k + 1) / 2;
    std::string codes(len, 'I');
    for (int l = 0; l < q - 1; ++l) codes[l] = 'Z';
    codes[q - 1] = (k % 2 == 1) ? 'X' : 'Y';
    return pauli_to_matrix(PauliString::from_codes(codes));
  };
  const cplx I{0.0, 1.0};
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (int j = first; j <= last; ++j) {
    const int q = j - first + 1;
    const double g = params.dephasing_rates[j - 1];
    m += I * g * (I * mu(2 * q - 1) * mu(2 * q) - Eigen::MatrixXcd::Identity(dim, dim));
    if (j < last) m += -2.0 * I * params.couplings[j - 1] * mu(2 * q) * mu(2 * q + 1);
  }
  return m;
}

std::vector<cplx> eigenvalues_of(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

std::vector<cplx> segment_spectrum(int first, int last, const ModelParams& params) {
  return eigenvalues_of(segment_matrix(first, last, params));
}

std::vector<cplx> composed_block_spectrum(const SectorLabel& label, const ModelParams& params) {
  std::vector<cplx> sums{cplx{}};
  for (const auto& [first, last] : broken_chain_segments(label)) {
    const auto seg = segment_spectrum(first, last, params);
    std::vector<cplx> next;
    next.reserve(sums.size() * seg.size());
    for (const cplx s : sums) {
      for (const cplx e : seg) next.push_back(s + e);
    }
    sums = std::move(next);
  }
  std::vector<cplx> out;
  out.reserve(2 * sums.size());
  for (const cplx s : sums) {
    out.push_back(s);
    out.push_back(s);
  }
  return out;
}

void sort_spectrum(std::vector<cplx>& v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
  });
}

double spectrum_mismatch(std::vector<cplx> a, std::vector<cplx> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  sort_spectrum(a);
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (const cplx x : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(x - b[j]);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    used[arg] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

void write_spectrum_csv(std::ostream& os, const SectorLabel& label, const std::vector<cplx>& eigenvalues,
                        bool header) {
  if (header) os << "label,index,re,im\n";
  char buf[96];
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof buf, ",%zu,%.16e,%.16e\n", i, eigenvalues[i].real(), eigenvalues[i].imag());
    os << label.to_string() << buf;
  }
}

}  // namespace lmem
