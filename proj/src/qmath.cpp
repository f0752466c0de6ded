#include "qkd/qmath.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qkd::qmath {

cplx inner(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("inner: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  return a.dot(b);  // Eigen conjugates the left operand
}

double born_probability(const Vec& state, const Vec& projector_state) {
  if (state.size() != projector_state.size()) {
    throw std::invalid_argument("born_probability: dimension mismatch");
  }
  if (!is_normalized(state, 1e-9) || !is_normalized(projector_state, 1e-9)) {
    throw std::invalid_argument("born_probability: unnormalized input");
  }
  return std::norm(projector_state.dot(state));
}

HermitianBasis hermitian_basis(int d) {
  if (d < 2) throw std::invalid_argument("hermitian_basis: d must be >= 2");
  HermitianBasis basis;
  basis.dim = d;
  basis.elems.reserve(static_cast<std::size_t>(d) * d);

  basis.elems.push_back(std::sqrt(2.0 / d) * Mat::Identity(d, d));
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      Mat s = Mat::Zero(d, d);
      s(j, k) = 1.0;
      s(k, j) = 1.0;
      basis.elems.push_back(s);
    }
  }
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      Mat a = Mat::Zero(d, d);
      a(j, k) = cplx(0.0, -1.0);
      a(k, j) = cplx(0.0, 1.0);
      basis.elems.push_back(a);
    }
  }
  for (int l = 1; l < d; ++l) {
    Mat m = Mat::Zero(d, d);
    const double scale = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) m(j, j) = scale;
    m(l, l) = -l * scale;
    basis.elems.push_back(m);
  }
  return basis;
}

double eig_min_hermitian(const Mat& m) {
  if (!is_hermitian(m, 1e-9)) {
    throw std::invalid_argument("eig_min_hermitian: non-Hermitian input");
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) < tol;
}

bool is_unitary(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m.adjoint() * m - Mat::Identity(m.rows(), m.cols())) < tol;
}

bool is_normalized(const Vec& v, double tol) {
  return std::abs(v.squaredNorm() - 1.0) < tol;
}

void check_density(const Mat& rho) {
  if (!is_hermitian(rho)) {
    throw std::invalid_argument("density matrix: not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > kHermitianTol ||
      std::abs(rho.trace().imag()) > kHermitianTol) {
    throw std::invalid_argument("density matrix: trace != 1");
  }
  if (eig_min_hermitian(rho) < -kPsdTol) {
    throw std::invalid_argument("density matrix: negative eigenvalue");
  }
}

Mat projector(const Vec& v) { return v * v.adjoint(); }

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Mat partial_trace_first(const Mat& rho, int dim_a, int dim_b) {
  Mat out = Mat::Zero(dim_b, dim_b);
  for (int i = 0; i < dim_b; ++i) {
    for (int j = 0; j < dim_b; ++j) {
      for (int a = 0; a < dim_a; ++a) {
        out(i, j) += rho(a * dim_b + i, a * dim_b + j);
      }
    }
  }
  return out;
}

Mat partial_trace_second(const Mat& rho, int dim_a, int dim_b) {
  Mat out = Mat::Zero(dim_a, dim_a);
  for (int i = 0; i < dim_a; ++i) {
    for (int j = 0; j < dim_a; ++j) {
      for (int b = 0; b < dim_b; ++b) {
        out(i, j) += rho(i * dim_b + b, j * dim_b + b);
      }
    }
  }
  return out;
}

Vec phase_fixed(const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      return v * (std::conj(v(i)) / std::abs(v(i)));
    }
  }
  return v;
}

}  // namespace qkd::qmath
