#include <doctest.h>

#include <random>

#include "lmem/pauli_algebra.hpp"
#include "oracles.hpp"

using namespace lmem;

namespace {

PauliString random_word(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> bits(0, (std::uint64_t{1} << n) - 1);
  std::uniform_int_distribution<int> ph(0, 3);
  return {n, bits(rng), bits(rng), ph(rng)};
}

std::string codes_of(const PauliString& p) {
  std::string s;
  for (int j = 1; j <= p.n_sites(); ++j) s += "IXYZ"[static_cast<int>(p.code(j))];
  return s;
}

oracle::Mat dense_of(const PauliString& p) { return p.phase() * oracle::word(codes_of(p)); }

}  // namespace

TEST_CASE("single-site products follow the Pauli multiplication table") {
  const auto x = PauliString::single(1, 1, Pauli::X);
  const auto y = PauliString::single(1, 1, Pauli::Y);
  const auto z = PauliString::single(1, 1, Pauli::Z);
  CHECK(x * y == z.with_phase(1));
  CHECK(y * x == z.with_phase(3));
  CHECK(y * z == x.with_phase(1));
  CHECK(z * x == y.with_phase(1));
  CHECK(x * x == PauliString(1));
}

TEST_CASE("two-site products carry the combined phase") {
  const auto xz = PauliString::from_codes("XZ");
  const auto yy = PauliString::from_codes("YY");
  // XY = iZ and ZY = -iX.
  CHECK(xz * yy == PauliString::from_codes("ZX"));
}

TEST_CASE("commutation signs") {
  CHECK(pauli_commutation_sign(PauliString::from_codes("XX"), PauliString::from_codes("ZZ")) == 1);
  CHECK(pauli_commutation_sign(PauliString::from_codes("XI"), PauliString::from_codes("ZI")) == -1);
  CHECK(pauli_commutation_sign(PauliString::from_codes("III"), PauliString::from_codes("XYZ")) == 1);
}

TEST_CASE("pauli_to_matrix matches Kronecker products") {
  CHECK(oracle::max_abs(pauli_to_matrix(PauliString::from_codes("X")) - oracle::pauli2('X')) == 0.0);
  CHECK(oracle::max_abs(pauli_to_matrix(PauliString::from_codes("ZY", 1)) -
                        oracle::cplx{0, 1} * oracle::word("ZY")) == 0.0);
  const auto id = pauli_to_matrix(PauliString(3));
  CHECK(oracle::max_abs(id - oracle::Mat::Identity(8, 8)) == 0.0);
}

TEST_CASE("multiplication and commutation agree with dense matrices on random words") {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 4; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto p = random_word(n, rng);
      const auto q = random_word(n, rng);
      const oracle::Mat dp = dense_of(p), dq = dense_of(q);
      REQUIRE(oracle::max_abs(dense_of(p * q) - dp * dq) == 0.0);
      REQUIRE(oracle::max_abs(pauli_to_matrix(p) - dp) == 0.0);
      const oracle::Mat comm = dp * dq - double(pauli_commutation_sign(p, q)) * dq * dp;
      REQUIRE(oracle::max_abs(comm) == 0.0);
    }
  }
}

TEST_CASE("self product gives phase squared times identity") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_word(5, rng);
    const auto sq = p * p;
    CHECK(sq.is_identity_word());
    CHECK(sq.phase() == p.phase() * p.phase());
  }
}

TEST_CASE("text round trip and parse errors") {
  const auto p = PauliString::parse("-iX1 Y3 Z4@5");
  CHECK(p.phase_exponent() == 3);
  CHECK(p.code(1) == Pauli::X);
  CHECK(p.code(2) == Pauli::I);
  CHECK(p.code(3) == Pauli::Y);
  CHECK(p.to_string() == "-iX1 Y3 Z4@5");
  CHECK(PauliString::parse(PauliString(4).to_string()) == PauliString(4));
  CHECK_THROWS_AS(PauliString::parse("X1 X1@3"), std::invalid_argument);
  CHECK_THROWS_AS(PauliString::parse("X4@3"), std::invalid_argument);
  CHECK_THROWS_AS(PauliString::parse("X1"), std::invalid_argument);
  CHECK_THROWS_AS(PauliString::parse("Q1@2"), std::invalid_argument);
  CHECK_THROWS_AS(PauliString::single(3, 4, Pauli::X), std::out_of_range);
}

TEST_CASE("Hermiticity follows the phase") {
  CHECK(PauliString::from_codes("XY").is_hermitian());
  CHECK(PauliString::from_codes("XY", 2).is_hermitian());
  CHECK_FALSE(PauliString::from_codes("XY", 1).is_hermitian());
}

TEST_CASE("OperatorSum merges, prunes and multiplies") {
  OperatorSum a(2);
  a.add(PauliString::from_codes("XX"), 1.0);
  a.add(PauliString::from_codes("XX"), -1.0);
  CHECK(a.empty());
  a.add(PauliString::from_codes("XI"), 2.0);
  a.add(PauliString::from_codes("ZI", 1), 1.0);  // stores i * ZI
  CHECK(a.coefficient(PauliString::from_codes("ZI")) == oracle::cplx{0, 1});
  CHECK_FALSE(a.is_hermitian());
  const OperatorSum prod = a * a.adjoint();
  CHECK(oracle::max_abs(prod.to_matrix() - a.to_matrix() * a.to_matrix().adjoint()) < 1e-14);
  OperatorSum s = a + a * 2.0;
  CHECK(s.coefficient(PauliString::from_codes("XI")) == oracle::cplx{6, 0});
  s.prune(10.0);
  CHECK(s.empty());
}

TEST_CASE("Jordan-Wigner words match the explicit Majorana matrices") {
  const int n = 3;
  for (int k = 1; k <= 2 * n; ++k) {
    const MajoranaMonomial m{n, std::uint64_t{1} << (k - 1), 1.0};
    const OperatorSum op = majorana_to_spin(m);
    CHECK(oracle::max_abs(op.to_matrix() - oracle::majorana(n, k)) == 0.0);
  }
  // w_1 -> X_1.
  CHECK(majorana_to_spin({2, 1, 1.0}).coefficient(PauliString::from_codes("XI")) == oracle::cplx{1, 0});
  // identity monomial -> identity word.
  CHECK(majorana_to_spin({2, 0, 1.0}).coefficient(PauliString(2)) == oracle::cplx{1, 0});
  // w_2 w_3 at N = 2 equals the dense product.
  const OperatorSum w23 = majorana_to_spin({2, 0b0110, 1.0});
  CHECK(oracle::max_abs(w23.to_matrix() - oracle::majorana(2, 2) * oracle::majorana(2, 3)) == 0.0);
}

TEST_CASE("canonical monomials equal ordered dense products") {
  const int n = 3;
  for (std::uint64_t a = 0; a < (1U << (2 * n)); ++a) {
    oracle::Mat prod = oracle::Mat::Identity(1 << n, 1 << n);
    for (int k = 1; k <= 2 * n; ++k) {
      if ((a >> (k - 1)) & 1U) prod = prod * oracle::majorana(n, k);
    }
    REQUIRE(oracle::max_abs(majorana_to_spin({n, a, 1.0}).to_matrix() - prod) == 0.0);
    const MajoranaMonomial m{n, a, 1.0};
    REQUIRE(oracle::max_abs(double(m.hermitian_sign()) * prod - prod.adjoint()) == 0.0);
  }
}

TEST_CASE("Majorana products reduce with the right sign") {
  std::mt19937_64 rng(11);
  const int n = 3;
  std::uniform_int_distribution<std::uint64_t> occ(0, 63);
  for (int t = 0; t < 200; ++t) {
    const MajoranaMonomial a{n, occ(rng), 1.0}, b{n, occ(rng), 1.0};
    const auto c = majorana_multiply(a, b);
    const oracle::Mat lhs = majorana_to_spin(c).to_matrix();
    const oracle::Mat rhs = majorana_to_spin(a).to_matrix() * majorana_to_spin(b).to_matrix();
    REQUIRE(oracle::max_abs(lhs - rhs) < 1e-15);
  }
}

TEST_CASE("spin_to_majorana inverts majorana_to_spin for every word up to N = 6") {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 6; ++n) {
    for (int t = 0; t < 300; ++t) {
      const auto p = random_word(n, rng);
      const MajoranaMonomial m = spin_to_majorana(p);
      const OperatorSum back = majorana_to_spin(m);
      REQUIRE(back.size() == 1);
      REQUIRE(back.coefficient(p.word()) == p.phase());
    }
  }
}

TEST_CASE("parity operator anticommutes with every single Majorana") {
  const int n = 4;
  const auto m = parity_operator(n);
  CHECK(oracle::max_abs(pauli_to_matrix(m) - oracle::parity(n)) == 0.0);
  for (int k = 1; k <= 2 * n; ++k) {
    const auto w = majorana_to_spin({n, std::uint64_t{1} << (k - 1), 1.0});
    CHECK(pauli_commutation_sign(m, w.terms().begin()->first) == -1);
  }
}
