#pragma once

#include "qkd/qmath.hpp"

// Arithmetic in GF(2^n) for n in {2, 3} and the generalized Pauli
// operators X_u, Z_v acting on the computational basis of C^d, d = 2^n.
// Field elements are n-bit values; the element <-> basis-index mapping is
// the identity on bit patterns.
namespace qkd::gf2n {

class Field {
 public:
  // Fixed reduction polynomials: x^2+x+1 (n=2), x^3+x+1 (n=3).
  explicit Field(int n);
  // Custom polynomial, given as a bitmask including the x^n bit.
  // Throws if the polynomial is reducible (checked exhaustively).
  Field(int n, unsigned reduction_poly);

  int degree() const { return n_; }
  int order() const { return d_; }  // d = 2^n
  unsigned reduction_poly() const { return poly_; }

  unsigned add(unsigned a, unsigned b) const;
  unsigned mul(unsigned a, unsigned b) const;
  // Absolute trace a + a^2 + a^4 + ... + a^(d/2), always 0 or 1.
  int trace(unsigned a) const;

  Mat op_x(unsigned u) const;  // X_u |i> = |i + u>
  Mat op_z(unsigned v) const;  // Z_v |i> = (-1)^Tr(v i) |i>

  bool operator==(const Field& other) const {
    return n_ == other.n_ && poly_ == other.poly_;
  }

 private:
  unsigned checked(unsigned a) const;
  int n_;
  int d_;
  unsigned poly_;
};

// Checked value type; arithmetic throws on field mismatch.
struct Elem {
  unsigned value;
  const Field* field;
};

Elem operator+(Elem a, Elem b);
Elem operator*(Elem a, Elem b);
int trace(Elem a);

}  // namespace qkd::gf2n
