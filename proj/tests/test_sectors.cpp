#include <doctest.h>

#include <set>
#include <sstream>

#include "lmem/sectors.hpp"
#include "oracles.hpp"

using namespace lmem;
using oracle::cplx;
using oracle::Mat;

TEST_CASE("sector labels") {
  const auto l = SectorLabel::parse("+--+");
  CHECK(l.n_sites() == 5);
  CHECK(l.p(2) == -1);
  CHECK(l.to_string() == "+--+");
  CHECK_THROWS_AS(SectorLabel::parse("+x"), std::invalid_argument);
  CHECK_THROWS_AS(SectorLabel(std::vector<int>{1, 0}), std::invalid_argument);
  CHECK(all_sector_labels(4).size() == 8);
}

TEST_CASE("sector bases partition the Liouville space") {
  SUBCASE("N = 2 sectors have dimension 8") {
    CHECK(enumerate_sector_basis(SectorLabel::parse("+"), 2).size() == 8);
    CHECK(enumerate_sector_basis(SectorLabel::parse("-"), 2).size() == 8);
  }
  SUBCASE("vacuum is in the all-plus sector") {
    const auto b = enumerate_sector_basis(SectorLabel::all_plus(4), 4);
    CHECK(b.front() == 0);
  }
  SUBCASE("exhaustive partition at N = 3 with P_j eigen-relations") {
    const int n = 3;
    std::set<LiouvilleIndex> seen;
    for (const auto& label : all_sector_labels(n)) {
      const auto basis = enumerate_sector_basis(label, n);
      CHECK(basis.size() == 16);
      CHECK(std::is_sorted(basis.begin(), basis.end()));
      for (const auto a : basis) {
        CHECK(seen.insert(a).second);
        for (int j = 1; j < n; ++j) {
          const Eigen::VectorXcd v = build_P_operator(j, n) * LiouvilleVector::basis(n, a).amplitudes;
          CHECK(v[a] == cplx(label.p(j)));
        }
      }
    }
    CHECK(seen.size() == 64);
  }
}

TEST_CASE("restriction keeps the full spectrum") {
  const int n = 3;
  const auto params = ModelParams::uniform(n, 1.0, 0.3);
  const auto l = build_liouvillian_thirdq(params);
  std::vector<cplx> blocks;
  for (const auto& label : all_sector_labels(n)) {
    const auto block = restrict_liouvillian(l, label);
    CHECK(block.matrix.rows() == 16);
    const auto ev = eigenvalues_of(block.matrix);
    blocks.insert(blocks.end(), ev.begin(), ev.end());
  }
  const auto full = eigenvalues_of(Mat(l.matrix));
  CHECK(spectrum_mismatch(full, blocks) < 1e-9);
}

TEST_CASE("N = 2 sector {-} matches full diagonalization filtered by eigenvector sector") {
  const int n = 2;
  const auto l = build_liouvillian_thirdq(ModelParams::uniform(n, 1.0, 0.3));
  const auto block = restrict_liouvillian(l, SectorLabel::parse("-"));
  Eigen::ComplexEigenSolver<Mat> es{Mat(l.matrix)};
  const SparseOp p = build_P_operator(1, n);
  std::vector<cplx> minus;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const Eigen::VectorXcd v = es.eigenvectors().col(k);
    const Eigen::VectorXcd pv = p * v;
    if ((pv + v).norm() < 1e-8 * v.norm()) minus.push_back(es.eigenvalues()[k]);
  }
  REQUIRE(minus.size() == 8);
  CHECK(spectrum_mismatch(minus, eigenvalues_of(block.matrix)) < 1e-9);
}

TEST_CASE("all-plus block is purely dissipative") {
  const int n = 3;
  const double g = 0.4;
  const auto l = build_liouvillian_thirdq(ModelParams::uniform(n, 2.5, g));
  const auto block = restrict_liouvillian(l, SectorLabel::all_plus(n));
  for (const cplx e : eigenvalues_of(block.matrix)) {
    CHECK(std::abs(e.real()) < 1e-12);
    const double k = -e.imag() / (2 * g);
    CHECK(std::abs(k - std::round(k)) < 1e-12);
  }
}

TEST_CASE("unitary blocks have real spectra") {
  const auto l = build_liouvillian_thirdq(ModelParams::uniform(3, 1.0, 0.0));
  for (const auto& label : all_sector_labels(3)) {
    for (const cplx e : eigenvalues_of(restrict_liouvillian(l, label).matrix)) CHECK(std::abs(e.imag()) < 1e-10);
  }
}

TEST_CASE("restriction rejects symmetry-breaking Liouvillians and names the bond") {
  ModelParams p = ModelParams::uniform(3, 1.0, 0.5);
  p.field_b[1] = 0.7;  // sigma^z_2 flips a_3, a_4 and so P_1 and P_2
  const auto l = build_liouvillian_direct(p);
  try {
    restrict_liouvillian(l, SectorLabel::all_plus(3));
    FAIL("expected a sector violation");
  } catch (const SectorViolation& e) {
    CHECK(e.bond == 1);
    CHECK(std::string(e.what()).find("P_1") != std::string::npos);
  }
}

TEST_CASE("Kitaev form equals the restricted Liouvillian in every sector") {
  for (int n = 2; n <= 3; ++n) {
    ModelParams p = ModelParams::uniform(n, 2.0, 1.0);
    for (int j = 0; j < n - 1; ++j) p.couplings[j] = 1.0 + 0.5 * j;
    for (int j = 0; j < n; ++j) p.dephasing_rates[j] = 0.3 + 0.2 * j;
    const auto l = build_liouvillian_thirdq(p);
    for (const auto& label : all_sector_labels(n)) {
      const auto block = restrict_liouvillian(l, label);
      CHECK(oracle::max_abs(kitaev_form_reconstruction(label, p) - block.matrix) < 1e-12);
    }
  }
  SUBCASE("homogeneous N = 3, J = 2, gamma = 1, sector {-,+}") {
    const auto p = ModelParams::uniform(3, 2.0, 1.0);
    const auto label = SectorLabel::parse("-+");
    const auto block = restrict_liouvillian(build_liouvillian_thirdq(p), label);
    CHECK(oracle::max_abs(kitaev_form_reconstruction(label, p) - block.matrix) < 1e-12);
  }
}

TEST_CASE("flipping the kappa sign convention breaks the Kitaev reconstruction") {
  const auto p = ModelParams::uniform(3, 2.0, 1.0);
  const auto label = SectorLabel::parse("--");
  const auto block = restrict_liouvillian(build_liouvillian_thirdq(p), label);
  CHECK(oracle::max_abs(kitaev_form_reconstruction(label, p, {true}) - block.matrix) > 0.5);
}

TEST_CASE("broken chain segments") {
  using Seg = std::vector<std::pair<int, int>>;
  CHECK(broken_chain_segments(SectorLabel::parse("+++")) == Seg{{1, 1}, {2, 2}, {3, 3}, {4, 4}});
  CHECK(broken_chain_segments(SectorLabel::parse("---")) == Seg{{1, 4}});
  CHECK(broken_chain_segments(SectorLabel::parse("+--+")) == Seg{{1, 1}, {2, 4}, {5, 5}});
}

TEST_CASE("segment spectra compose to the block spectrum") {
  const int n = 5;
  ModelParams p = ModelParams::uniform(n, 1.0, 0.5);
  for (int j = 0; j < n - 1; ++j) p.couplings[j] = 0.7 + 0.3 * j;
  for (int j = 0; j < n; ++j) p.dephasing_rates[j] = 0.25 + 0.1 * j;
  const auto l = build_liouvillian_thirdq(p);
  for (const char* text : {"+--+", "----", "++++", "-+-+"}) {
    const auto label = SectorLabel::parse(text);
    const auto block = restrict_liouvillian(l, label);
    CHECK(spectrum_mismatch(eigenvalues_of(block.matrix), composed_block_spectrum(label, p)) < 1e-9);
  }
}

TEST_CASE("two-site segment has the closed-form spectrum") {
  for (double g : {0.5, 1.0, 3.0}) {
    const double j = 1.5;
    ModelParams p = ModelParams::uniform(2, j, g);
    const auto ev = segment_spectrum(1, 2, p);
    const cplx root = 2.0 * std::sqrt(cplx(j * j - g * g));
    const cplx c{0, -2 * g};
    std::vector<cplx> expect{c + root, c - root, c + 2 * j, c - 2 * j};
    CHECK(spectrum_mismatch(ev, expect) < 1e-6);
  }
}

TEST_CASE("spectrum CSV") {
  std::ostringstream os;
  write_spectrum_csv(os, SectorLabel::parse("+-"), {cplx{1, -2}}, true);
  CHECK(os.str() == "label,index,re,im\n+-,0,1.0000000000000000e+00,-2.0000000000000000e+00\n");
}
