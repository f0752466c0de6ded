#include "qkd/states.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "qkd/gf2n.hpp"

namespace qkd::states {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dim(int d) {
  if (d != 2 && d != 4 && d != 8) {
    throw std::invalid_argument("states: unsupported dimension " + std::to_string(d));
  }
}

// Joint eigenbasis of the commuting class {X_u Z_(a u) : u != 0}.
// Each member is made Hermitian and involutive by the phase i^Tr(a u^2);
// binary weights keep the combined spectrum nondegenerate, so the
// eigenvectors are the unique common eigenbasis.
Basis stabilizer_class_basis(const gf2n::Field& field, unsigned a) {
  const int d = field.order();
  Mat h = Mat::Zero(d, d);
  for (unsigned u = 1; u < static_cast<unsigned>(d); ++u) {
    const unsigned v = field.mul(a, u);
    const int tr = field.trace(field.mul(a, field.mul(u, u)));
    const cplx phase = tr ? cplx(0.0, 1.0) : cplx(1.0, 0.0);
    h += std::pow(2.0, static_cast<double>(u - 1)) * phase * field.op_x(u) * field.op_z(v);
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(h);
  Basis basis;
  basis.dim = d;
  basis.label = "M" + std::to_string(a);
  for (int c = 0; c < d; ++c) {
    basis.vectors.push_back(qmath::phase_fixed(solver.eigenvectors().col(c)));
  }
  return basis;
}

// Characters of (GF(2^n), +): components (-1)^Tr(t x) / sqrt d. This is the
// joint eigenbasis of the {X_u} class.
Basis field_fourier_basis(const gf2n::Field& field) {
  const int d = field.order();
  Basis basis;
  basis.dim = d;
  basis.label = "F";
  for (int t = 0; t < d; ++t) {
    Vec v(d);
    for (int x = 0; x < d; ++x) {
      v(x) = field.trace(field.mul(static_cast<unsigned>(t), static_cast<unsigned>(x))) ? -1.0 : 1.0;
    }
    basis.vectors.push_back(v / std::sqrt(static_cast<double>(d)));
  }
  return basis;
}

}  // namespace

Basis computational_basis(int d) {
  check_dim(d);
  Basis basis;
  basis.dim = d;
  basis.label = "Z";
  for (int i = 0; i < d; ++i) {
    Vec v = Vec::Zero(d);
    v(i) = 1.0;
    basis.vectors.push_back(v);
  }
  return basis;
}

Basis fourier_basis(int d) {
  check_dim(d);
  Basis basis;
  basis.dim = d;
  basis.label = "F";
  for (int i = 0; i < d; ++i) {
    Vec v(d);
    for (int j = 0; j < d; ++j) {
      const double arg = 2.0 * kPi * i * j / d;
      v(j) = cplx(std::cos(arg), std::sin(arg));
    }
    basis.vectors.push_back(qmath::phase_fixed(v / std::sqrt(static_cast<double>(d))));
  }
  return basis;
}

MubSet mub_set(int d, int m) {
  check_dim(d);
  if (m != 2 && m != d + 1) {
    throw std::invalid_argument("mub_set: m must be 2 or d+1");
  }
  MubSet set;
  set.dim = d;
  set.bases.push_back(computational_basis(d));
  if (m == 2) {
    set.bases.push_back(fourier_basis(d));
    return set;
  }
  if (d == 2) {
    set.bases.push_back(fourier_basis(2));  // X eigenbasis
    Basis y;
    y.dim = 2;
    y.label = "Y";
    Vec plus(2), minus(2);
    plus << 1.0, cplx(0.0, 1.0);
    minus << 1.0, cplx(0.0, -1.0);
    y.vectors = {plus / std::sqrt(2.0), minus / std::sqrt(2.0)};
    set.bases.push_back(y);
    return set;
  }
  const gf2n::Field field(d == 4 ? 2 : 3);
  set.bases.push_back(field_fourier_basis(field));
  for (unsigned a = 1; a < static_cast<unsigned>(d); ++a) {
    set.bases.push_back(stabilizer_class_basis(field, a));
  }
  return set;
}

Mat displacement(int d, int j, int k) {
  check_dim(d);
  if (j < 0 || j >= d || k < 0 || k >= d) {
    throw std::out_of_range("displacement: index out of range");
  }
  Mat m = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double arg = 2.0 * kPi * j * i / d;
    m((k + i) % d, i) = cplx(std::cos(arg), std::sin(arg));
  }
  const double half = kPi * j * k / d;  // w^(jk/2)
  return cplx(std::cos(half), std::sin(half)) * m;
}

Vec sic_fiducial(int d) {
  if (d != 2) throw std::invalid_argument("sic_fiducial: only d=2 supported");
  Vec f(2);
  f(0) = std::sqrt((3.0 + std::sqrt(3.0)) / 6.0);
  f(1) = std::sqrt((3.0 - std::sqrt(3.0)) / 12.0) * cplx(1.0, -1.0);
  return f;
}

SicSet sic_set(int d) {
  if (d != 2) throw std::invalid_argument("sic_set: only d=2 supported");
  const Vec f = sic_fiducial(d);
  SicSet set;
  set.dim = d;
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      set.states.push_back(displacement(d, j, k) * f);
    }
  }
  return set;
}

Vec chau_state(unsigned i, unsigned j, int sign, int d) {
  check_dim(d);
  if (i == j) throw std::invalid_argument("chau_state: i == j");
  if (i >= static_cast<unsigned>(d) || j >= static_cast<unsigned>(d)) {
    throw std::invalid_argument("chau_state: index out of range");
  }
  Vec v = Vec::Zero(d);
  v(i) = 1.0;
  v(j) = (sign % 2 == 0) ? 1.0 : -1.0;
  return v / std::sqrt(2.0);
}

Vec chau_state(const ChauState& s, int d) { return chau_state(s.i, s.j, s.sign, d); }

std::vector<std::pair<unsigned, unsigned>> chau_pairs(int d) {
  check_dim(d);
  std::vector<std::pair<unsigned, unsigned>> pairs;
  for (unsigned i = 0; i < static_cast<unsigned>(d); ++i) {
    for (unsigned j = i + 1; j < static_cast<unsigned>(d); ++j) {
      pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

OamMap oam_map(int d) {
  check_dim(d);
  OamMap map;
  map.dim = d;
  for (int l = -d / 2; l <= d / 2; ++l) {
    if (l != 0) map.labels.push_back(l);
  }
  return map;
}

void save_states_csv(std::ostream& out,
                     const std::vector<std::pair<std::string, Vec>>& rows) {
  for (const auto& [label, v] : rows) {
    out << label;
    char buf[32];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v(i).real());
      out << ',' << buf;
      std::snprintf(buf, sizeof buf, "%.17g", v(i).imag());
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace qkd::states
