#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/optim.hpp"
#include "qkd/qmath.hpp"
#include "qkd/states.hpp"

// Singapore-protocol analysis (singlet joint probabilities, twirling,
// mutual information, MLE state fitting) and full quantum process
// tomography (chi-matrix MLE, process fidelity).
namespace qkd::tomo {

// Alice x Bob SIC-outcome distribution; d^2 x d^2 nonnegative entries.
using JointProbMatrix = Eigen::MatrixXd;

// Pure singlet density matrix on C^d x C^d,
// |Psi-> = (1/sqrt d) sum_m (-1)^(d-m) |m>|d-m-1>.
Mat singlet_state(int d);

// p_kl = Tr[rho_AB (E_k x E_l)] with SIC-POVM elements
// E_k = (1/d)|psi_k><psi_k|, so the entries sum to 1.
JointProbMatrix sic_joint_probs(const Mat& rho_ab, const states::SicSet& sic);

struct TwirlResult {
  JointProbMatrix matrix;
  double epsilon = 0.0;  // 16 * mean diagonal entry
};

// Symmetrization to p_kl = ((4-eps)/48)(1-d_kl) + (eps/16) d_kl. d=2 only.
TwirlResult twirl(const JointProbMatrix& p);

// I = sum p_kl log2(p_kl / (p_k p_l)), 0 log 0 = 0, after global
// renormalization.
double mutual_information(const JointProbMatrix& p);

// Same sum restricted to k != l (marginals still over everything).
// For a distribution whose ideal is exactly anti-correlated this treats
// same-index coincidences as background.
double mutual_information_anticorrelated(const JointProbMatrix& p);

// mutual_information of the twirled two-parameter matrix at this epsilon.
double twirled_mi(double epsilon);

struct MleConfig {
  int max_iterations = 20000;
  double tolerance = 1e-14;
  int restarts = 3;
  double step = 0.05;
  std::uint64_t seed = 7;
};

struct SicFit {
  std::vector<Vec> alice;
  std::vector<Vec> bob;
  double residual = 0.0;
  bool converged = false;
};

// Fits Bloch-parametrized state families for Alice and Bob by minimizing
// f(x) = sum_mn (|<psi_m^A(x)|psi_n^B(x)>|^2 - t_mn)^2 where the target
// overlaps t_mn = 1 - 2 d^2 p_mn come from the measured joint matrix
// (ideal input reproduces the ideal SIC overlaps). d=2 only.
SicFit fit_sic_states(const JointProbMatrix& p_exp, const MleConfig& cfg);

struct ProcessMatrix {
  int dim = 0;
  qmath::HermitianBasis basis;
  Mat chi;  // Hermitian PSD, unit trace
};

// Chi-matrix MLE: chi is parametrized as T^dagger T (PSD by construction)
// and the weighted likelihood
//   f = sum_ab [N_ab/N - p_ab(chi)]^2 / (2 max(p_ab, 1e-12))
// is minimized by simplex descent from a linear least-squares warm start.
// trace_preserving adds a penalty enforcing sum_ij chi_ij B_j B_i = I.
// Throws when the prepared/measured sets are not informationally complete.
ProcessMatrix fit_process(const channel::DetectionMatrix& dm,
                          const std::vector<channel::Prepared>& prepared,
                          const std::vector<channel::Context>& contexts,
                          const qmath::HermitianBasis& basis, const MleConfig& cfg,
                          bool trace_preserving);

// F = Tr[chi_exp chi_ideal] for unit-trace process matrices. Meaningful
// against a rank-1 (unitary) reference such as the ideal channel.
double process_fidelity(const ProcessMatrix& chi_exp, const ProcessMatrix& chi_ideal);

// Uhlmann fidelity (Tr sqrt(sqrt(A) B sqrt(A)))^2 between unit-trace chi
// matrices; equals 1 exactly when the reconstruction matches, for mixed
// processes too.
double reconstruction_fidelity(const ProcessMatrix& a, const ProcessMatrix& b);

// Real block then imaginary block, with a basis-ordering header.
void save_chi_csv(std::ostream& out, const ProcessMatrix& pm);

}  // namespace qkd::tomo
