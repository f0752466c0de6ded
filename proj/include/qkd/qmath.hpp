#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qkd {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

}  // namespace qkd

// Complex linear algebra at small fixed dimensions (states up to d=8,
// process matrices up to 64x64), plus the orthogonal Hermitian operator
// bases used for process tomography.
namespace qkd::qmath {

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kNormTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

// <a|b>, conjugating the first argument. Throws on dimension mismatch.
cplx inner(const Vec& a, const Vec& b);

// |<projector|state>|^2. Both vectors must be normalized.
double born_probability(const Vec& state, const Vec& projector_state);

// d^2 Hermitian operators with Tr(Bi Bj) = 2 delta_ij. elems[0] is
// sqrt(2/d) * I; the rest are the generalized Gell-Mann matrices ordered
// symmetric (lexicographic j<k), antisymmetric, then diagonal. For d=2
// this is exactly {I, X, Y, Z}.
struct HermitianBasis {
  int dim = 0;
  std::vector<Mat> elems;
};
HermitianBasis hermitian_basis(int d);

// Smallest eigenvalue of a Hermitian matrix. Throws on non-Hermitian input.
double eig_min_hermitian(const Mat& m);

double max_abs(const Mat& m);
bool is_hermitian(const Mat& m, double tol = kHermitianTol);
bool is_unitary(const Mat& m, double tol = kUnitaryTol);
bool is_normalized(const Vec& v, double tol = kNormTol);

// Throws std::invalid_argument unless rho is Hermitian, unit trace, and
// PSD to the module tolerances.
void check_density(const Mat& rho);

Mat projector(const Vec& v);
Mat kron(const Mat& a, const Mat& b);
Mat partial_trace_first(const Mat& rho, int dim_a, int dim_b);
Mat partial_trace_second(const Mat& rho, int dim_a, int dim_b);

// Global-phase convention: first amplitude with |v_i| > 1e-12 made real
// nonnegative.
Vec phase_fixed(const Vec& v);

}  // namespace qkd::qmath
