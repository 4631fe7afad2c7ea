#include "lmem/liouville_majorana.hpp"

#include <bit>
#include <stdexcept>

namespace lmem {

namespace {

double below_sign(int j, LiouvilleIndex a) {
  return (std::popcount(a & ((LiouvilleIndex{1} << (j - 1)) - 1)) & 1) ? -1.0 : 1.0;
}

void check_mode(int j, int n_sites) {
  if (j < 1 || j > 2 * n_sites) throw std::out_of_range("mode index " + std::to_string(j) + " out of range");
}

template <typename F>
MonomialOp build(int n_sites, F&& f) {
  const std::size_t dim = liouville_dim(n_sites);
  std::vector<LiouvilleIndex> target(dim);
  std::vector<cplx> factor(dim);
  for (LiouvilleIndex a = 0; a < dim; ++a) {
    const auto [t, c] = f(a);
    target[a] = t;
    factor[a] = c;
  }
  return make_monomial(n_sites, std::move(target), std::move(factor));
}

// i(c_k^dagger - c_k).
MonomialOp antisym_c(int k, int n_sites) {
  check_mode(k, n_sites);
  const LiouvilleIndex bit = LiouvilleIndex{1} << (k - 1);
  return build(n_sites, [&](LiouvilleIndex a) {
    const cplx ph = (a & bit) ? cplx{0, -1} : cplx{0, 1};
    return std::pair{a ^ bit, ph * below_sign(k, a)};
  });
}

// Z_k: 1 - 2n_k for odd k, 2n_k - 1 for even k.
MonomialOp spin_z(int k, int n_sites) {
  check_mode(k, n_sites);
  const bool odd = k % 2 == 1;
  return build(n_sites, [&](LiouvilleIndex a) {
    const double occ_sign = occupation(a, k) ? -1.0 : 1.0;
    return std::pair{a, cplx{odd ? occ_sign : -occ_sign}};
  });
}

MonomialOp z_string(int k, int n_sites) {
  MonomialOp s = MonomialOp::identity(n_sites);
  for (int l = 1; l < k; ++l) s = spin_z(l, n_sites) * s;
  return s;
}

}  // namespace

MonomialOp make_monomial(int n_sites, std::vector<LiouvilleIndex> target, std::vector<cplx> factor) {
  if (target.size() != factor.size() || target.size() != liouville_dim(n_sites)) {
    throw std::invalid_argument("MonomialOp: table size does not match 4^N");
  }
  MonomialOp op;
  op.n_sites_ = n_sites;
  op.target_ = std::move(target);
  op.factor_ = std::move(factor);
  return op;
}

MonomialOp MonomialOp::identity(int n_sites) {
  const std::size_t dim = liouville_dim(n_sites);
  std::vector<LiouvilleIndex> t(dim);
  for (LiouvilleIndex a = 0; a < dim; ++a) t[a] = a;
  return make_monomial(n_sites, std::move(t), std::vector<cplx>(dim, cplx{1.0}));
}

MonomialOp MonomialOp::operator*(const MonomialOp& rhs) const {
  if (n_sites_ != rhs.n_sites_) throw std::invalid_argument("MonomialOp: size mismatch");
  std::vector<LiouvilleIndex> t(dim());
  std::vector<cplx> f(dim());
  for (LiouvilleIndex a = 0; a < dim(); ++a) {
    const LiouvilleIndex mid = rhs.target_[a];
    t[a] = target_[mid];
    f[a] = factor_[mid] * rhs.factor_[a];
  }
  return make_monomial(n_sites_, std::move(t), std::move(f));
}

MonomialOp& MonomialOp::operator*=(cplx s) {
  for (auto& f : factor_) f *= s;
  return *this;
}

LiouvilleVector MonomialOp::apply(const LiouvilleVector& v) const {
  if (v.n_sites != n_sites_) throw std::invalid_argument("MonomialOp::apply: size mismatch");
  LiouvilleVector out(n_sites_);
  for (LiouvilleIndex a = 0; a < dim(); ++a) out.amplitudes[target_[a]] += factor_[a] * v.amplitudes[a];
  return out;
}

SparseOp MonomialOp::to_sparse() const {
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(dim());
  for (LiouvilleIndex a = 0; a < dim(); ++a) {
    if (factor_[a] != cplx{}) trips.emplace_back(target_[a], a, factor_[a]);
  }
  SparseOp m(dim(), dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

MonomialOp majorana_left(int j, int n_sites) {
  check_mode(j, n_sites);
  const LiouvilleIndex bit = LiouvilleIndex{1} << (j - 1);
  return build(n_sites, [&](LiouvilleIndex a) { return std::pair{a ^ bit, cplx{below_sign(j, a)}}; });
}

MonomialOp majorana_right(int j, int n_sites) {
  check_mode(j, n_sites);
  const LiouvilleIndex bit = LiouvilleIndex{1} << (j - 1);
  return build(n_sites, [&](LiouvilleIndex a) {
    return std::pair{a ^ bit, cplx{static_cast<double>(majorana_reorder_sign(a, bit))}};
  });
}

MonomialOp parity_op(int n_sites) {
  return build(n_sites, [](LiouvilleIndex a) { return std::pair{a, cplx{(std::popcount(a) & 1) ? -1.0 : 1.0}}; });
}

void LiouvilleOperatorIndex::validate(int n_sites) const {
  int hi = 0;
  switch (kind) {
    case LiouvilleOpKind::C:
    case LiouvilleOpKind::CDagger:
    case LiouvilleOpKind::X:
    case LiouvilleOpKind::Y:
    case LiouvilleOpKind::Z: hi = 2 * n_sites; break;
    case LiouvilleOpKind::Kappa: hi = 4 * n_sites; break;
    case LiouvilleOpKind::P: hi = n_sites - 1; break;
  }
  if (site < 1 || site > hi) {
    throw std::out_of_range(to_string() + ": index outside [1, " + std::to_string(hi) + "]");
  }
}

std::string LiouvilleOperatorIndex::to_string() const {
  static constexpr const char* kNames[] = {"c", "c+", "kappa", "P", "X", "Y", "Z"};
  return std::string(kNames[static_cast<int>(kind)]) + "_" + std::to_string(site);
}

MonomialOp liouville_spin(LiouvilleOpKind kind, int k, int n_sites) {
  LiouvilleOperatorIndex{kind, k}.validate(n_sites);
  const bool odd = k % 2 == 1;
  switch (kind) {
    case LiouvilleOpKind::Z: return spin_z(k, n_sites);
    case LiouvilleOpKind::X:
      return z_string(k, n_sites) * (odd ? majorana_left(k, n_sites) : antisym_c(k, n_sites));
    case LiouvilleOpKind::Y:
      return z_string(k, n_sites) * (odd ? antisym_c(k, n_sites) : majorana_left(k, n_sites));
    default: throw std::invalid_argument("liouville_spin: kind must be X, Y or Z");
  }
}

MonomialOp kappa_monomial(int k, int n_sites, KappaConvention conv) {
  LiouvilleOperatorIndex{LiouvilleOpKind::Kappa, k}.validate(n_sites);
  const int i = (k + 1) / 2;
  MonomialOp op = MonomialOp::identity(n_sites);
  for (int l = 1; l < i; ++l) op = op * liouville_spin(LiouvilleOpKind::X, l, n_sites);
  if (k % 2 == 1) {
    op = op * liouville_spin(LiouvilleOpKind::Z, i, n_sites);
    op *= conv.flip_odd_sign ? 1.0 : -1.0;
  } else {
    op = op * liouville_spin(LiouvilleOpKind::Y, i, n_sites);
  }
  return op;
}

SparseOp kappa_as_liouville_matrix(int k, int n_sites, KappaConvention conv) {
  return kappa_monomial(k, n_sites, conv).to_sparse();
}

SparseOp liouville_operator_matrix(const LiouvilleOperatorIndex& op, int n_sites, KappaConvention conv) {
  op.validate(n_sites);
  switch (op.kind) {
    case LiouvilleOpKind::C: return c_matrix(op.site, n_sites);
    case LiouvilleOpKind::CDagger: return c_dagger_matrix(op.site, n_sites);
    case LiouvilleOpKind::Kappa: return kappa_as_liouville_matrix(op.site, n_sites, conv);
    case LiouvilleOpKind::P: {
      const int j = op.site;
      return build(n_sites, [&](LiouvilleIndex a) { return std::pair{a, cplx{double(p_eigenvalue(a, j))}}; })
          .to_sparse();
    }
    default: return liouville_spin(op.kind, op.site, n_sites).to_sparse();
  }
}

}  // namespace lmem
