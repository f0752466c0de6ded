#include "qkd/tomography.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

namespace qkd::tomo {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Mat singlet_state(int d) {
  if (d < 2) throw std::invalid_argument("singlet_state: d must be >= 2");
  Vec psi = Vec::Zero(static_cast<Eigen::Index>(d) * d);
  for (int m = 0; m < d; ++m) {
    const double sign = (d - m) % 2 == 0 ? 1.0 : -1.0;
    psi(m * d + (d - m - 1)) = sign / std::sqrt(static_cast<double>(d));
  }
  return qmath::projector(psi);
}

JointProbMatrix sic_joint_probs(const Mat& rho_ab, const states::SicSet& sic) {
  const int d = sic.dim;
  const int n = d * d;
  if (rho_ab.rows() != n || rho_ab.cols() != n) {
    throw std::invalid_argument("sic_joint_probs: dimension mismatch");
  }
  JointProbMatrix p(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      Vec v = qmath::kron(sic.states[static_cast<std::size_t>(k)],
                          sic.states[static_cast<std::size_t>(l)]);
      p(k, l) = std::real(v.dot(rho_ab * v)) / (d * d);
    }
  }
  return p;
}

TwirlResult twirl(const JointProbMatrix& p) {
  if (p.rows() != 4 || p.cols() != 4) {
    throw std::invalid_argument("twirl: expected a 4x4 (d=2) matrix");
  }
  if (p.minCoeff() < 0.0 || p.sum() <= 0.0) {
    throw std::invalid_argument("twirl: invalid distribution");
  }
  const JointProbMatrix q = p / p.sum();
  TwirlResult result;
  result.epsilon = 16.0 * q.diagonal().mean();
  result.matrix = JointProbMatrix(4, 4);
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) {
      result.matrix(k, l) = k == l ? result.epsilon / 16.0
                                   : (4.0 - result.epsilon) / 48.0;
    }
  }
  return result;
}

namespace {

double mi_impl(const JointProbMatrix& p, bool skip_diagonal) {
  if (p.minCoeff() < 0.0 || p.sum() <= 0.0) {
    throw std::invalid_argument("mutual_information: invalid distribution");
  }
  const JointProbMatrix q = p / p.sum();
  const Eigen::VectorXd pk = q.rowwise().sum();
  const Eigen::VectorXd pl = q.colwise().sum();
  double info = 0.0;
  for (Eigen::Index k = 0; k < q.rows(); ++k) {
    for (Eigen::Index l = 0; l < q.cols(); ++l) {
      if (skip_diagonal && k == l) continue;
      if (q(k, l) > 0.0) {
        info += q(k, l) * std::log2(q(k, l) / (pk(k) * pl(l)));
      }
    }
  }
  return info;
}

}  // namespace

double mutual_information(const JointProbMatrix& p) { return mi_impl(p, false); }

double mutual_information_anticorrelated(const JointProbMatrix& p) {
  return mi_impl(p, true);
}

double twirled_mi(double epsilon) {
  if (epsilon < 0.0 || epsilon > 4.0) {
    throw std::invalid_argument("twirled_mi: epsilon outside [0,4]");
  }
  JointProbMatrix m(4, 4);
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) {
      m(k, l) = k == l ? epsilon / 16.0 : (4.0 - epsilon) / 48.0;
    }
  }
  return mutual_information(m);
}

namespace {

Vec bloch_state(double theta, double phi) {
  Vec v(2);
  v(0) = std::cos(theta / 2.0);
  v(1) = std::polar(std::sin(theta / 2.0), phi);
  return v;
}

void bloch_params(const Vec& v, double& theta, double& phi) {
  const Vec w = qmath::phase_fixed(v);
  theta = 2.0 * std::atan2(std::abs(w(1)), std::real(w(0)));
  phi = std::abs(w(1)) > 1e-12 ? std::arg(w(1)) : 0.0;
}

}  // namespace

SicFit fit_sic_states(const JointProbMatrix& p_exp, const MleConfig& cfg) {
  if (p_exp.rows() != 4 || p_exp.cols() != 4) {
    throw std::invalid_argument("fit_sic_states: expected a 4x4 (d=2) matrix");
  }
  if (p_exp.minCoeff() < 0.0 || p_exp.sum() <= 0.0) {
    throw std::invalid_argument("fit_sic_states: invalid distribution");
  }
  const JointProbMatrix q = p_exp / p_exp.sum();
  Eigen::MatrixXd target(4, 4);
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      target(m, n) = std::clamp(1.0 - 8.0 * q(m, n), 0.0, 1.0);
    }
  }

  const auto objective = [&target](const Eigen::VectorXd& x) {
    double sum = 0.0;
    Vec alice[4], bob[4];
    for (int s = 0; s < 4; ++s) {
      alice[s] = bloch_state(x(2 * s), x(2 * s + 1));
      bob[s] = bloch_state(x(8 + 2 * s), x(9 + 2 * s));
    }
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) {
        const double overlap = std::norm(alice[m].dot(bob[n]));
        const double diff = overlap - target(m, n);
        sum += diff * diff;
      }
    }
    return sum;
  };

  Eigen::VectorXd x0(16);
  const states::SicSet ideal = states::sic_set(2);
  for (int s = 0; s < 4; ++s) {
    double theta = 0.0, phi = 0.0;
    bloch_params(ideal.states[static_cast<std::size_t>(s)], theta, phi);
    x0(2 * s) = theta;
    x0(2 * s + 1) = phi;
    x0(8 + 2 * s) = theta;
    x0(9 + 2 * s) = phi;
  }

  optim::NmOptions opt;
  opt.max_iters = cfg.max_iterations;
  opt.f_tol = cfg.tolerance;
  opt.step = cfg.step;

  Eigen::VectorXd best_x = x0;
  double best_f = objective(x0);
  bool converged = false;
  std::mt19937_64 rng(cfg.seed);
  for (int r = 0; r <= cfg.restarts; ++r) {
    Eigen::VectorXd start = best_x;
    if (r > 0) {
      for (Eigen::Index i = 0; i < start.size(); ++i) {
        start(i) += cfg.step * (2.0 * uniform01(rng) - 1.0);
      }
    }
    const optim::NmResult res = optim::nelder_mead(objective, start, opt);
    if (res.value < best_f) {
      best_f = res.value;
      best_x = res.x;
    }
    converged = converged || res.converged;
  }

  SicFit fit;
  fit.residual = best_f;
  fit.converged = converged;
  for (int s = 0; s < 4; ++s) {
    fit.alice.push_back(qmath::phase_fixed(bloch_state(best_x(2 * s), best_x(2 * s + 1))));
    fit.bob.push_back(qmath::phase_fixed(bloch_state(best_x(8 + 2 * s), best_x(9 + 2 * s))));
  }
  return fit;
}

namespace {

// chi parameter layout: n real diagonal entries of T, then (re, im) pairs
// for the strictly-lower-triangular entries, row-major.
int chi_param_count(int n) { return n * n; }

Mat t_from_params(const Eigen::VectorXd& x, int n) {
  Mat t = Mat::Zero(n, n);
  int idx = 0;
  for (int i = 0; i < n; ++i) t(i, i) = x(idx++);
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      const double re = x(idx++);
      const double im = x(idx++);
      t(i, j) = cplx(re, im);
    }
  }
  return t;
}

Eigen::VectorXd params_from_t(const Mat& t) {
  const int n = static_cast<int>(t.rows());
  Eigen::VectorXd x(chi_param_count(n));
  int idx = 0;
  for (int i = 0; i < n; ++i) x(idx++) = std::real(t(i, i));
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      x(idx++) = std::real(t(i, j));
      x(idx++) = std::imag(t(i, j));
    }
  }
  return x;
}

}  // namespace

ProcessMatrix fit_process(const channel::DetectionMatrix& dm,
                          const std::vector<channel::Prepared>& prepared,
                          const std::vector<channel::Context>& contexts,
                          const qmath::HermitianBasis& basis, const MleConfig& cfg,
                          bool trace_preserving) {
  const int d = basis.dim;
  const int n = d * d;
  if (dm.dim != d) throw std::invalid_argument("fit_process: dimension mismatch");
  if (dm.row_labels.size() != prepared.size()) {
    throw std::invalid_argument("fit_process: prepared states do not match matrix rows");
  }
  int total_cols = 0;
  for (const auto& ctx : contexts) total_cols += static_cast<int>(ctx.projectors.size());
  if (total_cols != dm.entries.cols()) {
    throw std::invalid_argument("fit_process: contexts do not match matrix columns");
  }

  // h vectors: p(col | prep) = weight * h^dagger chi h, h_i = conj(<phi|B_i|psi>).
  const int rows = static_cast<int>(prepared.size());
  std::vector<Vec> h_vectors;
  std::vector<double> weights;
  std::vector<double> data;
  h_vectors.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(total_cols));
  for (int a = 0; a < rows; ++a) {
    int col = 0;
    for (const auto& ctx : contexts) {
      for (const Vec& proj : ctx.projectors) {
        Vec h(n);
        for (int i = 0; i < n; ++i) {
          h(i) = std::conj(proj.dot(basis.elems[static_cast<std::size_t>(i)] *
                                    prepared[static_cast<std::size_t>(a)].state));
        }
        h_vectors.push_back(std::move(h));
        weights.push_back(ctx.weight);
        data.push_back(dm.entries(a, col));
        ++col;
      }
    }
  }
  const int n_obs = static_cast<int>(data.size());

  // Linear warm start: solve the (real-parametrized) least-squares system
  // for a Hermitian chi, then project onto the PSD cone.
  Eigen::MatrixXd design(n_obs, n * n);
  for (int o = 0; o < n_obs; ++o) {
    const Vec& h = h_vectors[static_cast<std::size_t>(o)];
    int idx = 0;
    for (int k = 0; k < n; ++k) design(o, idx++) = weights[static_cast<std::size_t>(o)] * std::norm(h(k));
    for (int k = 0; k < n; ++k) {
      for (int l = k + 1; l < n; ++l) {
        const cplx c = std::conj(h(k)) * h(l);
        design(o, idx++) = weights[static_cast<std::size_t>(o)] * 2.0 * std::real(c);
        design(o, idx++) = weights[static_cast<std::size_t>(o)] * -2.0 * std::imag(c);
      }
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-9);
  if (qr.rank() < n * n) {
    throw std::invalid_argument(
        "fit_process: prepared/measured sets are not informationally complete (rank " +
        std::to_string(qr.rank()) + " of " + std::to_string(n * n) + ")");
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.data(), n_obs);
  const Eigen::VectorXd solution = qr.solve(y);
  Mat chi0 = Mat::Zero(n, n);
  {
    int idx = 0;
    for (int k = 0; k < n; ++k) chi0(k, k) = solution(idx++);
    for (int k = 0; k < n; ++k) {
      for (int l = k + 1; l < n; ++l) {
        const double re = solution(idx++);
        const double im = solution(idx++);
        chi0(k, l) = cplx(re, im);
        chi0(l, k) = cplx(re, -im);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(chi0);
  Mat chi_psd = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double lam = std::max(es.eigenvalues()(k), 0.0);
    chi_psd += lam * qmath::projector(es.eigenvectors().col(k));
  }
  if (chi_psd.trace().real() < 1e-12) {
    chi_psd = Mat::Identity(n, n) * (d / 2.0 / n);  // degenerate data; neutral start
  }

  // chi = T T^dagger with T the lower-triangular Cholesky factor, so the
  // warm start reproduces chi_psd exactly.
  Eigen::LLT<Mat> llt(chi_psd + 1e-10 * Mat::Identity(n, n));

  const Mat identity = Mat::Identity(d, d);
  const double tp_weight = 1000.0;
  // chi = T T^dagger, so p = w |T^dagger h|^2 and the trace-preserving
  // operator is sum_k M_k^dagger M_k over the Kraus columns M_k = sum_i T_ik B_i.
  const auto objective = [&](const Eigen::VectorXd& x) {
    const Mat t = t_from_params(x, n);
    double sum = 0.0;
    for (int o = 0; o < n_obs; ++o) {
      const double p = weights[static_cast<std::size_t>(o)] *
                       (t.adjoint() * h_vectors[static_cast<std::size_t>(o)]).squaredNorm();
      const double diff = data[static_cast<std::size_t>(o)] - p;
      sum += diff * diff / (2.0 * std::max(p, 1e-12));
    }
    if (trace_preserving) {
      Mat tp = Mat::Zero(d, d);
      for (int k = 0; k < n; ++k) {
        Mat m = Mat::Zero(d, d);
        for (int i = 0; i < n; ++i) {
          if (t(i, k) != 0.0) m += t(i, k) * basis.elems[static_cast<std::size_t>(i)];
        }
        tp += m.adjoint() * m;
      }
      sum += tp_weight * (tp - identity).squaredNorm();
    }
    return sum;
  };

  Eigen::VectorXd x0 = params_from_t(Mat(llt.matrixL()));

  optim::NmOptions opt;
  opt.max_iters = cfg.max_iterations;
  opt.f_tol = cfg.tolerance;
  opt.step = cfg.step;

  Eigen::VectorXd best_x = x0;
  double best_f = objective(x0);
  std::mt19937_64 rng(cfg.seed);
  for (int r = 0; r <= cfg.restarts; ++r) {
    Eigen::VectorXd start = best_x;
    if (r > 0) {
      for (Eigen::Index i = 0; i < start.size(); ++i) {
        start(i) += cfg.step * (2.0 * uniform01(rng) - 1.0);
      }
    }
    const optim::NmResult res = optim::nelder_mead(objective, start, opt);
    if (res.value < best_f) {
      best_f = res.value;
      best_x = res.x;
    }
  }

  const Mat t = t_from_params(best_x, n);
  Mat chi = t * t.adjoint();
  chi /= chi.trace().real();

  ProcessMatrix pm;
  pm.dim = d;
  pm.basis = basis;
  pm.chi = chi;
  return pm;
}

namespace {

void check_same_basis(const ProcessMatrix& a, const ProcessMatrix& b,
                      const char* who) {
  if (a.dim != b.dim || a.basis.elems.size() != b.basis.elems.size()) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
  for (std::size_t i = 0; i < a.basis.elems.size(); ++i) {
    if (qmath::max_abs(a.basis.elems[i] - b.basis.elems[i]) > 1e-10) {
      throw std::invalid_argument(std::string(who) + ": basis mismatch");
    }
  }
}

}  // namespace

double process_fidelity(const ProcessMatrix& chi_exp, const ProcessMatrix& chi_ideal) {
  check_same_basis(chi_exp, chi_ideal, "process_fidelity");
  const cplx f = (chi_exp.chi * chi_ideal.chi).trace();
  if (std::abs(f.imag()) > 1e-10) {
    throw std::invalid_argument("process_fidelity: non-real fidelity");
  }
  return f.real();
}

double reconstruction_fidelity(const ProcessMatrix& a, const ProcessMatrix& b) {
  check_same_basis(a, b, "reconstruction_fidelity");
  Eigen::SelfAdjointEigenSolver<Mat> ea(a.chi);
  Mat sqrt_a = Mat::Zero(a.chi.rows(), a.chi.cols());
  for (Eigen::Index k = 0; k < ea.eigenvalues().size(); ++k) {
    const double lam = std::max(ea.eigenvalues()(k), 0.0);
    sqrt_a += std::sqrt(lam) * qmath::projector(ea.eigenvectors().col(k));
  }
  Eigen::SelfAdjointEigenSolver<Mat> em(sqrt_a * b.chi * sqrt_a);
  double trace_sqrt = 0.0;
  for (Eigen::Index k = 0; k < em.eigenvalues().size(); ++k) {
    trace_sqrt += std::sqrt(std::max(em.eigenvalues()(k), 0.0));
  }
  return trace_sqrt * trace_sqrt;
}

void save_chi_csv(std::ostream& out, const ProcessMatrix& pm) {
  char buf[32];
  out << "# dim=" << pm.dim
      << " basis=identity,sym(j<k),antisym(j<k),diag trace=1\n";
  out << "# real\n";
  const int n = pm.dim * pm.dim;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", std::real(pm.chi(i, j)));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
  out << "# imag\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", std::imag(pm.chi(i, j)));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace qkd::tomo
