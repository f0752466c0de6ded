#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "qkd/channel.hpp"

// Command implementations behind the qkdlab binary; split out so tests can
// drive them directly. Data goes to `out` (or files under the output
// directory), errors to `err`; exit code 0 iff no error.
namespace qkd::cli {

struct RunConfig {
  std::string protocol = "bb84";
  int dim = 2;
  std::string noise = "none";
  long rounds = 100000;
  long shots = 0;  // 0 = analytic detection matrix, >0 = sampled
  std::uint64_t seed = 1;
  std::string out_dir;  // empty: $QKDLAB_OUT, else "."
  std::string format = "text";
};

struct RatesConfig {
  bool table1 = false;
  std::string protocol;
  int dim = 2;
  double e_b = 0.0;
  double delta = -1.0;  // >= 0 applies the multiphoton correction (bb84 d=2)
  std::string format = "text";
};

struct TomographyConfig {
  std::string input;      // detection-matrix CSV, or joint CSV with mi=true
  std::string synthetic;  // noise spec; used when input is empty
  int dim = 2;
  std::string method = "mub";  // mub | sic
  bool mi = false;
  bool non_trace_preserving = false;
  long shots = 0;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string format = "text";
};

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_rates(const RatesConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_thresholds(const std::string& format, std::ostream& out, std::ostream& err);
int cmd_tomography(const TomographyConfig& cfg, std::ostream& out, std::ostream& err);

// Noise grammar: none | depolarizing:p | rotation:theta | pauli:p00,p01,...
// (pauli probabilities row-major over (u, v), d in {4, 8}).
channel::Channel parse_noise(const std::string& spec, int dim);

}  // namespace qkd::cli
