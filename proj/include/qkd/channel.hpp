#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkd/gf2n.hpp"
#include "qkd/qmath.hpp"

// Quantum channel models, the Born-rule detection engine, and
// probability-of-detection matrices (analytic or sampled).
namespace qkd::channel {

struct Channel {
  int dim = 0;
  std::string tag;
  std::vector<Mat> kraus;
};

Channel identity_channel(int d);

// rho -> (1-p) rho + p I/d.
Channel depolarizing_channel(int d, double p);

// Kraus sqrt(p_uv) X_u Z_v; probs(u, v) must be a distribution.
Channel pauli_channel(const gf2n::Field& field, const Eigen::MatrixXd& probs);

// Unitary channel exp(-i theta G) with G the symmetric tridiagonal
// coupling matrix (ones on the off-diagonals).
Channel rotation_channel(int d, double theta);

Mat apply(const Channel& ch, const Mat& rho);

// A measurement context: POVM elements weight * |projector><projector|.
// weight = 1 models plain verification projections (possibly incomplete,
// entries then sum to < 1 and the remainder is a no-click); weight = 1/d
// turns a SIC state set into the complete SIC-POVM.
struct Context {
  std::string id;
  std::vector<std::string> labels;
  std::vector<Vec> projectors;
  double weight = 1.0;
};

struct Prepared {
  std::string label;
  Vec state;
};

struct SampledMode {
  long shots = 0;
  std::uint64_t seed = 0;
};

struct DetectionMatrix {
  int dim = 0;
  std::string protocol = "custom";
  bool sampled = false;
  long shots = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> row_labels;
  std::vector<Context> contexts;  // projectors may be empty after load_csv
  Eigen::MatrixXd entries;        // rows x total columns, contexts in order

  int cols() const;
  int col_offset(int context_index) const;
  // Sum of one row's entries within one context.
  double context_mass(int row, int context_index) const;
};

DetectionMatrix detection_matrix(const std::vector<Prepared>& prepared,
                                 const std::vector<Context>& contexts,
                                 const Channel& ch);

// Entries are multinomial frequencies per (row, context); the residual
// 1 - sum(probabilities) is a no-click bin that is sampled but not
// recorded. Deterministic for a given seed.
DetectionMatrix detection_matrix(const std::vector<Prepared>& prepared,
                                 const std::vector<Context>& contexts,
                                 const Channel& ch, const SampledMode& mode);

// Exact chi coefficients of the channel in the given Hermitian basis,
// normalized to unit trace (so the identity channel is chi_00 = 1).
Mat chi_of_channel(const Channel& ch, const qmath::HermitianBasis& basis);

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CSV grammar (documented in README):
//   # dim=<d> protocol=<tag> mode=<analytic|sampled> shots=<n> seed=<s>
//   # contexts: <id>=<label>|<label>|...[@<weight>];<id>=...
//   row,<id>:<label>,...
//   <row_label>,<value>,...
void save_csv(std::ostream& out, const DetectionMatrix& dm);
DetectionMatrix load_csv(std::istream& in);

}  // namespace qkd::channel
