#pragma once

#include <functional>

#include <Eigen/Dense>

// Derivative-free simplex descent used by the tomography fits.
namespace qkd::optim {

struct NmOptions {
  int max_iters = 20000;
  double f_tol = 1e-14;
  double x_tol = 1e-12;
  double step = 0.1;  // initial simplex edge
};

struct NmResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

NmResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x0, const NmOptions& opt);

}  // namespace qkd::optim
