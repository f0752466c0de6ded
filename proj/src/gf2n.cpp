#include "qkd/gf2n.hpp"

#include <stdexcept>
#include <string>

namespace qkd::gf2n {

namespace {

unsigned default_poly(int n) {
  switch (n) {
    case 2:
      return 0b111;  // x^2 + x + 1
    case 3:
      return 0b1011;  // x^3 + x + 1
    default:
      throw std::invalid_argument("Field: only n in {2,3} supported");
  }
}

int poly_degree(unsigned p) {
  int deg = -1;
  for (int b = 0; b < 32; ++b) {
    if (p >> b & 1u) deg = b;
  }
  return deg;
}

// Remainder of carry-less division a mod b.
unsigned poly_mod(unsigned a, unsigned b) {
  const int db = poly_degree(b);
  for (int da = poly_degree(a); da >= db; da = poly_degree(a)) {
    a ^= b << (da - db);
  }
  return a;
}

bool is_irreducible(unsigned p, int n) {
  if (poly_degree(p) != n) return false;
  // Exhaustive factor check: no divisor of degree 1..n-1.
  for (unsigned g = 2; g < (1u << n); ++g) {
    if (poly_degree(g) < 1) continue;
    if (poly_mod(p, g) == 0) return false;
  }
  return true;
}

}  // namespace

Field::Field(int n) : Field(n, default_poly(n)) {}

Field::Field(int n, unsigned reduction_poly) : n_(n), poly_(reduction_poly) {
  if (n != 2 && n != 3) {
    throw std::invalid_argument("Field: only n in {2,3} supported");
  }
  d_ = 1 << n;
  if (!is_irreducible(poly_, n_)) {
    throw std::invalid_argument("Field: reduction polynomial is not irreducible");
  }
}

unsigned Field::checked(unsigned a) const {
  if (a >= static_cast<unsigned>(d_)) {
    throw std::invalid_argument("Field: element " + std::to_string(a) +
                                " out of range for GF(" + std::to_string(d_) + ")");
  }
  return a;
}

unsigned Field::add(unsigned a, unsigned b) const {
  return checked(a) ^ checked(b);
}

unsigned Field::mul(unsigned a, unsigned b) const {
  checked(a);
  checked(b);
  unsigned r = 0;
  while (b != 0) {
    if (b & 1u) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a >> n_ & 1u) a ^= poly_;
  }
  return r;
}

int Field::trace(unsigned a) const {
  checked(a);
  unsigned acc = 0;
  unsigned x = a;
  for (int k = 0; k < n_; ++k) {
    acc ^= x;
    x = mul(x, x);
  }
  return static_cast<int>(acc & 1u);
}

Mat Field::op_x(unsigned u) const {
  checked(u);
  Mat m = Mat::Zero(d_, d_);
  for (int i = 0; i < d_; ++i) m(i ^ static_cast<int>(u), i) = 1.0;
  return m;
}

Mat Field::op_z(unsigned v) const {
  checked(v);
  Mat m = Mat::Zero(d_, d_);
  for (int i = 0; i < d_; ++i) {
    m(i, i) = trace(mul(v, static_cast<unsigned>(i))) ? -1.0 : 1.0;
  }
  return m;
}

namespace {
const Field& same_field(Elem a, Elem b) {
  if (a.field == nullptr || b.field == nullptr || !(*a.field == *b.field)) {
    throw std::invalid_argument("gf2n: field spec mismatch");
  }
  return *a.field;
}
}  // namespace

Elem operator+(Elem a, Elem b) {
  return {same_field(a, b).add(a.value, b.value), a.field};
}

Elem operator*(Elem a, Elem b) {
  return {same_field(a, b).mul(a.value, b.value), a.field};
}

int trace(Elem a) {
  if (a.field == nullptr) throw std::invalid_argument("gf2n: null field");
  return a.field->trace(a.value);
}

}  // namespace qkd::gf2n
