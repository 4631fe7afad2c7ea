#include "lmem/pauli_algebra.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace lmem {

namespace {

std::uint64_t site_mask(int n_sites) {
  return n_sites >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_sites) - 1;
}

void check_sites(int n_sites) {
  if (n_sites < 1 || n_sites > kMaxSites) {
    throw std::invalid_argument("PauliString: n_sites must lie in [1, " + std::to_string(kMaxSites) +
                                "], got " + std::to_string(n_sites));
  }
}

void check_same_size(const PauliString& p, const PauliString& q) {
  if (p.n_sites() != q.n_sites()) {
    throw std::invalid_argument("Pauli size mismatch: " + std::to_string(p.n_sites()) + " vs " +
                                std::to_string(q.n_sites()));
  }
}

// Reverse the low n bits so that site 1 becomes the most significant matrix bit.
std::uint64_t to_matrix_bits(std::uint64_t bits, int n_sites) {
  std::uint64_t out = 0;
  for (int s = 0; s < n_sites; ++s) {
    if ((bits >> s) & 1U) out |= std::uint64_t{1} << (n_sites - 1 - s);
  }
  return out;
}

}  // namespace

cplx phase_of(int exponent) {
  switch (((exponent % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

PauliString::PauliString(int n_sites) : n_sites_(n_sites) { check_sites(n_sites); }

PauliString::PauliString(int n_sites, std::uint64_t x_bits, std::uint64_t z_bits, int phase_exponent)
    : n_sites_(n_sites), x_(x_bits), z_(z_bits), phase_(((phase_exponent % 4) + 4) % 4) {
  check_sites(n_sites);
  if ((x_bits | z_bits) & ~site_mask(n_sites)) {
    throw std::invalid_argument("PauliString: bits set beyond n_sites");
  }
}

PauliString PauliString::single(int n_sites, int site, Pauli p) {
  check_sites(n_sites);
  if (site < 1 || site > n_sites) {
    throw std::out_of_range("PauliString: site " + std::to_string(site) + " outside [1, " +
                            std::to_string(n_sites) + "]");
  }
  const std::uint64_t bit = std::uint64_t{1} << (site - 1);
  const bool has_x = p == Pauli::X || p == Pauli::Y;
  const bool has_z = p == Pauli::Z || p == Pauli::Y;
  return {n_sites, has_x ? bit : 0, has_z ? bit : 0, 0};
}

PauliString PauliString::from_codes(std::string_view codes, int phase_exponent) {
  const int n = static_cast<int>(codes.size());
  check_sites(n);
  std::uint64_t x = 0, z = 0;
  for (int s = 0; s < n; ++s) {
    const std::uint64_t bit = std::uint64_t{1} << s;
    switch (std::toupper(static_cast<unsigned char>(codes[s]))) {
      case 'I': break;
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default: throw std::invalid_argument("PauliString: bad code character in '" + std::string(codes) + "'");
    }
  }
  return {n, x, z, phase_exponent};
}

PauliString PauliString::parse(std::string_view text) {
  const auto fail = [&](const std::string& why) {
    throw std::invalid_argument("cannot parse Pauli word '" + std::string(text) + "': " + why);
  };
  const auto at = text.rfind('@');
  if (at == std::string_view::npos) fail("missing '@N' suffix");
  int n = 0;
  {
    const auto tail = text.substr(at + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), n);
    if (ec != std::errc{} || ptr != tail.data() + tail.size()) fail("bad site count");
  }
  check_sites(n);

  std::string_view body = text.substr(0, at);
  int exponent = 0;
  std::size_t pos = 0;
  while (pos < body.size() && body[pos] == ' ') ++pos;
  if (pos < body.size() && (body[pos] == '+' || body[pos] == '-')) {
    if (body[pos] == '-') exponent = 2;
    ++pos;
  }
  if (pos < body.size() && body[pos] == 'i') {
    exponent += 1;
    ++pos;
  }

  std::uint64_t x = 0, z = 0;
  bool saw_token = false;
  while (pos < body.size()) {
    if (body[pos] == ' ') {
      ++pos;
      continue;
    }
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(body[pos])));
    ++pos;
    std::size_t end = pos;
    while (end < body.size() && std::isdigit(static_cast<unsigned char>(body[end]))) ++end;
    if (c == 'I' && end == pos) {
      saw_token = true;
      continue;
    }
    if (end == pos) fail("site index missing after '" + std::string(1, c) + "'");
    int site = 0;
    std::from_chars(body.data() + pos, body.data() + end, site);
    pos = end;
    if (site < 1 || site > n) fail("site " + std::to_string(site) + " out of range");
    const std::uint64_t bit = std::uint64_t{1} << (site - 1);
    if ((x | z) & bit) fail("site " + std::to_string(site) + " repeated");
    switch (c) {
      case 'I': break;
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default: fail("unknown Pauli letter");
    }
    saw_token = true;
  }
  if (!saw_token) fail("empty word (use I for the identity)");
  return {n, x, z, exponent};
}

Pauli PauliString::code(int site) const {
  if (site < 1 || site > n_sites_) throw std::out_of_range("PauliString::code: site out of range");
  const bool hx = (x_ >> (site - 1)) & 1U;
  const bool hz = (z_ >> (site - 1)) & 1U;
  if (hx && hz) return Pauli::Y;
  if (hx) return Pauli::X;
  if (hz) return Pauli::Z;
  return Pauli::I;
}

int PauliString::weight() const { return std::popcount(x_ | z_); }

PauliString PauliString::adjoint() const {
  // Words are Hermitian, so only the phase conjugates.
  return {n_sites_, x_, z_, -phase_};
}

std::string PauliString::to_string() const {
  static constexpr const char* kPrefix[] = {"+", "+i", "-", "-i"};
  std::string out = kPrefix[phase_];
  if (is_identity_word()) {
    out += "I";
  } else {
    bool first = true;
    for (int s = 1; s <= n_sites_; ++s) {
      const Pauli c = code(s);
      if (c == Pauli::I) continue;
      if (!first) out += ' ';
      first = false;
      out += "IXYZ"[static_cast<int>(c)];
      out += std::to_string(s);
    }
  }
  out += '@';
  out += std::to_string(n_sites_);
  return out;
}

PauliString pauli_multiply(const PauliString& p, const PauliString& q) {
  check_same_size(p, q);
  const std::uint64_t m = site_mask(p.n_sites());
  const std::uint64_t x1 = p.x_bits(), z1 = p.z_bits(), x2 = q.x_bits(), z2 = q.z_bits();
  const std::uint64_t X1 = x1 & ~z1 & m, Y1 = x1 & z1, Z1 = ~x1 & z1 & m;
  const std::uint64_t X2 = x2 & ~z2 & m, Y2 = x2 & z2, Z2 = ~x2 & z2 & m;
  // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
  const int cyclic = std::popcount((X1 & Y2) | (Y1 & Z2) | (Z1 & X2));
  const int anti = std::popcount((Y1 & X2) | (Z1 & Y2) | (X1 & Z2));
  return {p.n_sites(), x1 ^ x2, z1 ^ z2, p.phase_exponent() + q.phase_exponent() + cyclic - anti};
}

int pauli_commutation_sign(const PauliString& p, const PauliString& q) {
  check_same_size(p, q);
  const int overlap = std::popcount((p.x_bits() & q.z_bits()) ^ (p.z_bits() & q.x_bits()));
  return (overlap & 1) ? -1 : 1;
}

int dense_limit() {
  if (const char* env = std::getenv("LMEM_DENSE_LIMIT")) {
    int value = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc{} && ptr == s.data() + s.size() && value > 0) return value;
  }
  return 10;
}

PauliAction::PauliAction(const PauliString& p)
    : flip(to_matrix_bits(p.x_bits(), p.n_sites())),
      sign_mask(to_matrix_bits(p.z_bits(), p.n_sites())),
      base_exponent(p.phase_exponent() + std::popcount(p.x_bits() & p.z_bits())) {}

cplx PauliAction::phase(std::uint64_t y) const {
  return phase_of(base_exponent + 2 * (std::popcount(y & sign_mask) & 1));
}

Eigen::MatrixXcd pauli_to_matrix(const PauliString& p) {
  if (p.n_sites() > dense_limit()) {
    throw std::length_error("pauli_to_matrix: N=" + std::to_string(p.n_sites()) + " exceeds dense limit " +
                            std::to_string(dense_limit()));
  }
  const std::uint64_t dim = std::uint64_t{1} << p.n_sites();
  const PauliAction act(p);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::uint64_t y = 0; y < dim; ++y) m(y ^ act.flip, y) = act.phase(y);
  return m;
}

// ---------------------------------------------------------------------------
// OperatorSum

OperatorSum::OperatorSum(const PauliString& p, cplx coefficient) : n_sites_(p.n_sites()) { add(p, coefficient); }

void OperatorSum::add(const PauliString& p, cplx coefficient) {
  if (n_sites_ == 0) n_sites_ = p.n_sites();
  if (p.n_sites() != n_sites_) throw std::invalid_argument("OperatorSum::add: size mismatch");
  const cplx value = coefficient * p.phase();
  if (value == cplx{}) return;
  auto [it, inserted] = terms_.try_emplace(p.word(), value);
  if (!inserted) {
    it->second += value;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

cplx OperatorSum::coefficient(const PauliString& word) const {
  const auto it = terms_.find(word.word());
  return it == terms_.end() ? cplx{} : it->second * word.phase();
}

OperatorSum OperatorSum::adjoint() const {
  OperatorSum out(n_sites_);
  for (const auto& [w, c] : terms_) out.terms_.emplace(w, std::conj(c));
  return out;
}

bool OperatorSum::is_hermitian(double tol) const {
  for (const auto& [w, c] : terms_) {
    if (std::abs(c.imag()) > tol) return false;
  }
  return true;
}

void OperatorSum::prune(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

Eigen::MatrixXcd OperatorSum::to_matrix() const {
  if (n_sites_ == 0) throw std::logic_error("OperatorSum::to_matrix: unsized operator");
  if (n_sites_ > dense_limit()) throw std::length_error("OperatorSum::to_matrix: exceeds dense limit");
  const std::uint64_t dim = std::uint64_t{1} << n_sites_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [w, c] : terms_) {
    const PauliAction act(w);
    for (std::uint64_t y = 0; y < dim; ++y) m(y ^ act.flip, y) += c * act.phase(y);
  }
  return m;
}

std::string OperatorSum::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [w, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)*" << w.to_string();
  }
  if (first) os << "0";
  return os.str();
}

OperatorSum& OperatorSum::operator+=(const OperatorSum& other) {
  for (const auto& [w, c] : other.terms_) add(w, c);
  return *this;
}

OperatorSum& OperatorSum::operator-=(const OperatorSum& other) {
  for (const auto& [w, c] : other.terms_) add(w, -c);
  return *this;
}

OperatorSum& OperatorSum::operator*=(cplx s) {
  if (s == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [w, c] : terms_) c *= s;
  return *this;
}

OperatorSum operator*(const OperatorSum& a, const OperatorSum& b) {
  OperatorSum out(a.n_sites() ? a.n_sites() : b.n_sites());
  for (const auto& [wa, ca] : a.terms_) {
    for (const auto& [wb, cb] : b.terms_) out.add(pauli_multiply(wa, wb), ca * cb);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Majorana layer

int MajoranaMonomial::degree() const { return std::popcount(occupation); }

int MajoranaMonomial::hermitian_sign() const {
  const int d = degree();
  return ((d * (d - 1) / 2) & 1) ? -1 : 1;
}

int majorana_reorder_sign(std::uint64_t a, std::uint64_t b) {
  int swaps = 0;
  while (b) {
    const int j = std::countr_zero(b);
    b &= b - 1;
    const std::uint64_t above = (j >= 63) ? 0 : (a >> (j + 1));
    swaps += std::popcount(above);
  }
  return (swaps & 1) ? -1 : 1;
}

MajoranaMonomial majorana_multiply(const MajoranaMonomial& a, const MajoranaMonomial& b) {
  if (a.n_sites != b.n_sites) throw std::invalid_argument("majorana_multiply: size mismatch");
  const double sign = majorana_reorder_sign(a.occupation, b.occupation);
  return {a.n_sites, a.occupation ^ b.occupation, sign * a.coefficient * b.coefficient};
}

std::pair<PauliString, int> majorana_word(int n_sites, std::uint64_t occupation) {
  check_sites(n_sites);
  if (occupation >> (2 * n_sites)) throw std::invalid_argument("majorana_word: occupation beyond 2N modes");
  PauliString acc(n_sites);
  while (occupation) {
    const int k = std::countr_zero(occupation);  // w_{k+1}
    occupation &= occupation - 1;
    const int site = k / 2;                      // 0-based
    const std::uint64_t x = std::uint64_t{1} << site;
    const std::uint64_t string = x - 1;          // Z on sites before
    const PauliString w(n_sites, x, (k % 2 == 0) ? string : (string | x), 0);
    acc = pauli_multiply(acc, w);
  }
  return {acc.word(), acc.phase_exponent()};
}

std::uint64_t majorana_occupation(const PauliString& p) {
  std::uint64_t a = 0;
  int x_parity_above = 0;
  for (int j = p.n_sites() - 1; j >= 0; --j) {
    const int xj = (p.x_bits() >> j) & 1U;
    const int zj = (p.z_bits() >> j) & 1U;
    const int even = zj ^ x_parity_above;  // a_{2j} (1-based)
    const int odd = xj ^ even;             // a_{2j-1}
    a |= std::uint64_t(odd) << (2 * j);
    a |= std::uint64_t(even) << (2 * j + 1);
    x_parity_above ^= xj;
  }
  return a;
}

MajoranaMonomial spin_to_majorana(const PauliString& p) {
  const std::uint64_t a = majorana_occupation(p);
  const auto [word, e] = majorana_word(p.n_sites(), a);
  // p = i^k W and w^a = i^e W.
  return {p.n_sites(), a, phase_of(p.phase_exponent() - e)};
}

OperatorSum majorana_to_spin(const MajoranaMonomial& m) {
  const auto [word, e] = majorana_word(m.n_sites, m.occupation);
  OperatorSum out(m.n_sites);
  out.add(word, m.coefficient * phase_of(e));
  return out;
}

PauliString parity_operator(int n_sites) {
  return {n_sites, 0, site_mask(n_sites), 2 * n_sites};
}

}  // namespace lmem
