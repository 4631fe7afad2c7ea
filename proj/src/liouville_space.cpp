#include "lmem/liouville_space.hpp"

#include <bit>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmem {

namespace {

void check_liouville_sites(int n_sites) {
  if (n_sites < 1 || n_sites > kMaxLiouvilleSites) {
    throw std::length_error("Liouville space: N=" + std::to_string(n_sites) + " outside [1, " +
                            std::to_string(kMaxLiouvilleSites) + "]");
  }
}

void check_mode(int j, int n_sites) {
  if (j < 1 || j > 2 * n_sites) {
    throw std::out_of_range("fermion mode " + std::to_string(j) + " outside [1, " + std::to_string(2 * n_sites) +
                            "]");
  }
}

double string_sign(int j, LiouvilleIndex a) {
  const LiouvilleIndex below = a & ((LiouvilleIndex{1} << (j - 1)) - 1);
  return (std::popcount(below) & 1) ? -1.0 : 1.0;
}

template <typename Action>
LiouvilleVector apply_basis_action(const LiouvilleVector& v, Action&& act) {
  LiouvilleVector out(v.n_sites);
  for (LiouvilleIndex a = 0; a < v.dim(); ++a) {
    if (v.amplitudes[a] == cplx{}) continue;
    if (const auto img = act(a)) out.amplitudes[img->index] += img->sign * v.amplitudes[a];
  }
  return out;
}

template <typename Action>
SparseOp basis_action_matrix(int n_sites, Action&& act) {
  const std::size_t dim = liouville_dim(n_sites);
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(dim / 2);
  for (LiouvilleIndex a = 0; a < dim; ++a) {
    if (const auto img = act(a)) trips.emplace_back(img->index, a, img->sign);
  }
  SparseOp m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

std::size_t liouville_dim(int n_sites) {
  check_liouville_sites(n_sites);
  return std::size_t{1} << (2 * n_sites);
}

LiouvilleVector::LiouvilleVector(int n) : n_sites(n), amplitudes(Eigen::VectorXcd::Zero(liouville_dim(n))) {}

LiouvilleVector::LiouvilleVector(int n, Eigen::VectorXcd amps) : n_sites(n), amplitudes(std::move(amps)) {
  if (static_cast<std::size_t>(amplitudes.size()) != liouville_dim(n)) {
    throw std::invalid_argument("LiouvilleVector: amplitude count does not match 4^N");
  }
}

LiouvilleVector LiouvilleVector::basis(int n, LiouvilleIndex a) {
  LiouvilleVector v(n);
  v.amplitudes[a] = 1.0;
  return v;
}

cplx liouville_inner(const LiouvilleVector& a, const LiouvilleVector& b) {
  if (a.n_sites != b.n_sites) throw std::invalid_argument("liouville_inner: size mismatch");
  return std::ldexp(1.0, a.n_sites) * a.amplitudes.dot(b.amplitudes);
}

std::optional<BasisImage> c_dagger_on_basis(int j, LiouvilleIndex a, int n_sites) {
  check_mode(j, n_sites);
  const LiouvilleIndex bit = LiouvilleIndex{1} << (j - 1);
  if (a & bit) return std::nullopt;
  return BasisImage{a | bit, string_sign(j, a)};
}

std::optional<BasisImage> c_on_basis(int j, LiouvilleIndex a, int n_sites) {
  check_mode(j, n_sites);
  const LiouvilleIndex bit = LiouvilleIndex{1} << (j - 1);
  if (!(a & bit)) return std::nullopt;
  return BasisImage{a & ~bit, string_sign(j, a)};
}

LiouvilleVector apply_c(int j, const LiouvilleVector& v) {
  check_mode(j, v.n_sites);
  return apply_basis_action(v, [&](LiouvilleIndex a) { return c_on_basis(j, a, v.n_sites); });
}

LiouvilleVector apply_c_dagger(int j, const LiouvilleVector& v) {
  check_mode(j, v.n_sites);
  return apply_basis_action(v, [&](LiouvilleIndex a) { return c_dagger_on_basis(j, a, v.n_sites); });
}

SparseOp c_matrix(int j, int n_sites) {
  check_mode(j, n_sites);
  return basis_action_matrix(n_sites, [&](LiouvilleIndex a) { return c_on_basis(j, a, n_sites); });
}

SparseOp c_dagger_matrix(int j, int n_sites) {
  check_mode(j, n_sites);
  return basis_action_matrix(n_sites, [&](LiouvilleIndex a) { return c_dagger_on_basis(j, a, n_sites); });
}

SparseOp identity_op(int n_sites) {
  const auto dim = static_cast<Eigen::Index>(liouville_dim(n_sites));
  SparseOp id(dim, dim);
  id.setIdentity();
  return id;
}

int basis_hermitian_sign(LiouvilleIndex a) {
  const int d = std::popcount(a);
  return ((d * (d - 1) / 2) & 1) ? -1 : 1;
}

LiouvilleVector vectorize(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("vectorize: matrix is not square");
  const auto dim = static_cast<std::uint64_t>(rho.rows());
  if (dim < 2 || !std::has_single_bit(dim)) throw std::invalid_argument("vectorize: dimension is not 2^N");
  const int n = std::countr_zero(dim);
  if (n > dense_limit()) throw std::length_error("vectorize: N exceeds dense limit");
  LiouvilleVector v(n);
  const double norm = std::ldexp(1.0, -n);
  for (LiouvilleIndex a = 0; a < v.dim(); ++a) {
    // w^a = i^e W, so tr((w^a)^dagger rho) = i^{-e} tr(W rho).
    const auto [word, e] = majorana_word(n, a);
    const PauliAction act(word);
    cplx tr{};
    for (std::uint64_t y = 0; y < dim; ++y) tr += act.phase(y) * rho(y, y ^ act.flip);
    v.amplitudes[a] = phase_of(-e) * tr * norm;
  }
  return v;
}

Eigen::MatrixXcd devectorize(const LiouvilleVector& v) {
  const int n = v.n_sites;
  if (n > dense_limit()) throw std::length_error("devectorize: N exceeds dense limit");
  const std::uint64_t dim = std::uint64_t{1} << n;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (LiouvilleIndex a = 0; a < v.dim(); ++a) {
    const cplx c = v.amplitudes[a];
    if (c == cplx{}) continue;
    const auto [word, e] = majorana_word(n, a);
    const PauliAction act(word);
    const cplx ce = c * phase_of(e);
    for (std::uint64_t y = 0; y < dim; ++y) rho(y ^ act.flip, y) += ce * act.phase(y);
  }
  return rho;
}

LiouvilleVector vectorize(const OperatorSum& op) {
  LiouvilleVector v(op.n_sites());
  for (const auto& [word, c] : op.terms()) {
    const MajoranaMonomial m = spin_to_majorana(word);
    v.amplitudes[static_cast<Eigen::Index>(m.occupation)] += c * m.coefficient;
  }
  return v;
}

LiouvilleVector hermitian_conjugate(const LiouvilleVector& v) {
  LiouvilleVector out(v.n_sites);
  for (LiouvilleIndex a = 0; a < v.dim(); ++a) {
    out.amplitudes[a] = static_cast<double>(basis_hermitian_sign(a)) * std::conj(v.amplitudes[a]);
  }
  return out;
}

}  // namespace lmem
