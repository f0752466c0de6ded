#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qkd/qmath.hpp"

// State families used by the protocols: computational and Fourier bases,
// full MUB sets for d = 2,4,8, the d=2 SIC-POVM from Weyl-Heisenberg
// displacements of the exact fiducial, the qubit-like pair states, and the
// OAM bookkeeping labels.
namespace qkd::states {

struct Basis {
  int dim = 0;
  std::string label;
  std::vector<Vec> vectors;
};

struct MubSet {
  int dim = 0;
  std::vector<Basis> bases;
};

// d^2 states D_jk |f>, indexed j*d + k.
struct SicSet {
  int dim = 0;
  std::vector<Vec> states;
  const Vec& at(int j, int k) const { return states[static_cast<std::size_t>(j) * dim + k]; }
};

struct OamMap {
  int dim = 0;
  std::vector<int> labels;  // ascending, symmetric about 0, 0 excluded for d=4,8
};

// Qubit-like state (|i> + (-1)^sign |j>)/sqrt(2) inside C^d.
struct ChauState {
  unsigned i = 0;
  unsigned j = 1;
  int sign = 0;
};

Basis computational_basis(int d);

// |phi_i> = (1/sqrt d) sum_j w^(i j) |j>, w = exp(2 pi i / d).
Basis fourier_basis(int d);

// m mutually unbiased bases, m in {2, d+1}. m=2 is {computational, Fourier}.
// The full set for d=2 is {Z, X, Y}; for d=4,8 it is the computational
// basis, the GF(2^n)-character basis, and the d-1 joint eigenbases of the
// commuting X_u Z_(a u) operator classes. Unbiasedness is certified by
// tests, not by any printed matrix.
MubSet mub_set(int d, int m);

// D_jk = w^(jk/2) sum_m w^(jm) |k+m mod d><m|; always unitary.
Mat displacement(int d, int j, int k);

// Exact d=2 fiducial: (sqrt((3+sqrt3)/6), sqrt((3-sqrt3)/12) (1-i)).
Vec sic_fiducial(int d);

SicSet sic_set(int d);

Vec chau_state(unsigned i, unsigned j, int sign, int d);
Vec chau_state(const ChauState& s, int d);

// Unordered pairs i<j in lexicographic order.
std::vector<std::pair<unsigned, unsigned>> chau_pairs(int d);

OamMap oam_map(int d);

// One state per row: label, then interleaved re/im amplitude columns.
void save_states_csv(std::ostream& out,
                     const std::vector<std::pair<std::string, Vec>>& rows);

}  // namespace qkd::states
