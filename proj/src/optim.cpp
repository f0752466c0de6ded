#include "qkd/optim.hpp"

#include <vector>

namespace qkd::optim {

NmResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x0, const NmOptions& opt) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.reserve(static_cast<std::size_t>(n) + 1);
  values.reserve(static_cast<std::size_t>(n) + 1);
  simplex.push_back(x0);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = x0;
    v(i) += opt.step;
    simplex.push_back(v);
  }
  for (const auto& v : simplex) values.push_back(f(v));

  auto order = [&] {
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      auto vx = simplex[i];
      auto vf = values[i];
      std::size_t j = i;
      while (j > 0 && values[j - 1] > vf) {
        simplex[j] = simplex[j - 1];
        values[j] = values[j - 1];
        --j;
      }
      simplex[j] = vx;
      values[j] = vf;
    }
  };
  order();

  NmResult result;
  int iter = 0;
  for (; iter < opt.max_iters; ++iter) {
    if (values.back() - values.front() < opt.f_tol) break;
    double spread = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      spread = std::max(spread, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    }
    if (spread < opt.x_tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i];
    centroid /= n;

    const Eigen::VectorXd reflected = centroid + (centroid - simplex.back());
    const double fr = f(reflected);
    if (fr < values.front()) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex.back());
      const double fe = f(expanded);
      if (fe < fr) {
        simplex.back() = expanded;
        values.back() = fe;
      } else {
        simplex.back() = reflected;
        values.back() = fr;
      }
    } else if (fr < values[values.size() - 2]) {
      simplex.back() = reflected;
      values.back() = fr;
    } else {
      const bool outside = fr < values.back();
      const Eigen::VectorXd base = outside ? reflected : simplex.back();
      const Eigen::VectorXd contracted = centroid + 0.5 * (base - centroid);
      const double fc = f(contracted);
      if (fc < std::min(fr, values.back())) {
        simplex.back() = contracted;
        values.back() = fc;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          values[i] = f(simplex[i]);
        }
      }
    }
    order();
  }
  result.x = simplex.front();
  result.value = values.front();
  result.iterations = iter;
  result.converged = iter < opt.max_iters;
  return result;
}

}  // namespace qkd::optim
