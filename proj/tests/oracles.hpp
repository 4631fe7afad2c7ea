#pragma once

// Reference constructions for tests, built from explicit Kronecker products and
// textbook formulas only, without going through the library's symbolic paths.

#include <complex>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat pauli2(char c) {
  Mat m(2, 2);
  const cplx i{0, 1};
  switch (c) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1; break;
  }
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

/// Dense matrix of a code string such as "XIZ", site 1 leftmost.
inline Mat word(const std::string& codes) {
  Mat m = Mat::Identity(1, 1);
  for (char c : codes) m = kron(m, pauli2(c));
  return m;
}

inline Mat site_op(int n, int site, char c) {
  std::string s(n, 'I');
  s[site - 1] = c;
  return word(s);
}

/// w_{2j-1} = Z..Z X_j, w_{2j} = Z..Z Y_j built from Kronecker products.
inline Mat majorana(int n, int k) {
  const int j = (k + 1) / 2;
  std::string s(n, 'I');
  for (int l = 0; l < j - 1; ++l) s[l] = 'Z';
  s[j - 1] = (k % 2 == 1) ? 'X' : 'Y';
  return word(s);
}

/// (-1)^N prod Z.
inline Mat parity(int n) { return ((n % 2) ? -1.0 : 1.0) * word(std::string(n, 'Z')); }

/// Lindblad right-hand side d rho/dt = -i[H, rho] + sum L rho L^+ - {L^+L, rho}/2.
template <typename Ls>
Mat lindblad_rhs(const Mat& h, const Ls& ls, const Mat& rho) {
  const cplx i{0, 1};
  Mat out = -i * (h * rho - rho * h);
  for (const Mat& l : ls) {
    const Mat ld = l.adjoint();
    out += l * rho * ld - 0.5 * (ld * l * rho + rho * ld * l);
  }
  return out;
}

inline Mat random_matrix(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = cplx{g(rng), g(rng)};
  return m;
}

/// Random full-rank density matrix A A^+ / tr.
inline Mat random_density(int n, std::mt19937_64& rng) {
  const Mat a = random_matrix(1 << n, rng);
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

/// Random pure state |psi><psi|.
inline Mat random_pure(int n, std::mt19937_64& rng) {
  const Mat a = random_matrix(1 << n, rng);
  Eigen::VectorXcd psi = a.col(0).normalized();
  return psi * psi.adjoint();
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
