#include "qkd/channel.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qkd::channel {

namespace {

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// 53-bit uniform double in [0,1); avoids the implementation-defined
// std::uniform_real_distribution so sampled outputs are portable.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Channel identity_channel(int d) {
  if (d < 2) throw std::invalid_argument("identity_channel: d must be >= 2");
  return {d, "identity", {Mat::Identity(d, d)}};
}

Channel depolarizing_channel(int d, double p) {
  if (d < 2) throw std::invalid_argument("depolarizing_channel: d must be >= 2");
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("depolarizing_channel: p out of range");
  }
  // Kraus set: sqrt(1 - p + p/d^2) I plus the d^2-1 non-identity
  // Heisenberg-Weyl unitaries, each with weight p/d^2. Their uniform
  // mixture is the complete depolarizer, so the total map is
  // (1-p) rho + p I/d.
  Channel ch{d, "depolarizing", {}};
  const double w = p / (d * d);
  ch.kraus.push_back(std::sqrt(1.0 - p + w) * Mat::Identity(d, d));
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      if (a == 0 && b == 0) continue;
      Mat u = Mat::Zero(d, d);
      for (int m = 0; m < d; ++m) {
        u((m + a) % d, m) = std::polar(1.0, 2.0 * std::numbers::pi * b * m / d);
      }
      ch.kraus.push_back(std::sqrt(w) * u);
    }
  }
  return ch;
}

Channel pauli_channel(const gf2n::Field& field, const Eigen::MatrixXd& probs) {
  const int d = field.order();
  if (probs.rows() != d || probs.cols() != d) {
    throw std::invalid_argument("pauli_channel: probs must be d x d");
  }
  if (probs.minCoeff() < 0.0 || std::abs(probs.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("pauli_channel: invalid distribution");
  }
  Channel ch{d, "pauli", {}};
  for (int u = 0; u < d; ++u) {
    for (int v = 0; v < d; ++v) {
      if (probs(u, v) == 0.0) continue;
      ch.kraus.push_back(std::sqrt(probs(u, v)) *
                         (field.op_x(static_cast<unsigned>(u)) *
                          field.op_z(static_cast<unsigned>(v))));
    }
  }
  return ch;
}

Channel rotation_channel(int d, double theta) {
  if (d < 2) throw std::invalid_argument("rotation_channel: d must be >= 2");
  Mat g = Mat::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) {
    g(i, i + 1) = 1.0;
    g(i + 1, i) = 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(g);
  Vec phases(d);
  for (int i = 0; i < d; ++i) {
    phases(i) = std::polar(1.0, -theta * solver.eigenvalues()(i));
  }
  Mat u = solver.eigenvectors() * phases.asDiagonal() *
          solver.eigenvectors().adjoint();
  return {d, "rotation", {u}};
}

Mat apply(const Channel& ch, const Mat& rho) {
  if (rho.rows() != ch.dim || rho.cols() != ch.dim) {
    throw std::invalid_argument("apply: dimension mismatch");
  }
  Mat out = Mat::Zero(ch.dim, ch.dim);
  for (const Mat& k : ch.kraus) out += k * rho * k.adjoint();
  return out;
}

int DetectionMatrix::cols() const {
  int n = 0;
  for (const auto& c : contexts) n += static_cast<int>(c.labels.size());
  return n;
}

int DetectionMatrix::col_offset(int context_index) const {
  int n = 0;
  for (int c = 0; c < context_index; ++c) {
    n += static_cast<int>(contexts[c].labels.size());
  }
  return n;
}

double DetectionMatrix::context_mass(int row, int context_index) const {
  const int off = col_offset(context_index);
  const int len = static_cast<int>(contexts[context_index].labels.size());
  return entries.row(row).segment(off, len).sum();
}

namespace {

DetectionMatrix analytic_matrix(const std::vector<Prepared>& prepared,
                                const std::vector<Context>& contexts,
                                const Channel& ch) {
  DetectionMatrix dm;
  dm.dim = ch.dim;
  dm.contexts = contexts;
  for (const auto& p : prepared) dm.row_labels.push_back(p.label);
  dm.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(prepared.size()),
                                     dm.cols());
  for (std::size_t r = 0; r < prepared.size(); ++r) {
    if (prepared[r].state.size() != ch.dim) {
      throw std::invalid_argument("detection_matrix: prepared state dimension mismatch");
    }
    const Mat rho = qkd::channel::apply(ch, qmath::projector(prepared[r].state));
    int col = 0;
    for (const auto& ctx : contexts) {
      if (ctx.labels.size() != ctx.projectors.size()) {
        throw std::invalid_argument("detection_matrix: context labels/projectors mismatch");
      }
      for (const Vec& proj : ctx.projectors) {
        if (proj.size() != ch.dim) {
          throw std::invalid_argument("detection_matrix: projector dimension mismatch");
        }
        dm.entries(static_cast<Eigen::Index>(r), col++) =
            ctx.weight * std::real(proj.dot(rho * proj));
      }
    }
  }
  return dm;
}

}  // namespace

DetectionMatrix detection_matrix(const std::vector<Prepared>& prepared,
                                 const std::vector<Context>& contexts,
                                 const Channel& ch) {
  DetectionMatrix dm = analytic_matrix(prepared, contexts, ch);
  dm.sampled = false;
  return dm;
}

DetectionMatrix detection_matrix(const std::vector<Prepared>& prepared,
                                 const std::vector<Context>& contexts,
                                 const Channel& ch, const SampledMode& mode) {
  if (mode.shots <= 0) {
    throw std::invalid_argument("detection_matrix: shots must be > 0");
  }
  DetectionMatrix dm = analytic_matrix(prepared, contexts, ch);
  dm.sampled = true;
  dm.shots = mode.shots;
  dm.seed = mode.seed;
  std::mt19937_64 rng(mode.seed);
  for (Eigen::Index r = 0; r < dm.entries.rows(); ++r) {
    int col = 0;
    for (std::size_t c = 0; c < contexts.size(); ++c) {
      const int len = static_cast<int>(contexts[c].labels.size());
      std::vector<double> cumulative(len);
      double acc = 0.0;
      for (int k = 0; k < len; ++k) {
        acc += dm.entries(r, col + k);
        cumulative[k] = acc;
      }
      std::vector<long> counts(len, 0);
      for (long s = 0; s < mode.shots; ++s) {
        const double u = uniform01(rng);
        // u >= acc falls in the no-click remainder and is dropped
        for (int k = 0; k < len; ++k) {
          if (u < cumulative[k]) {
            ++counts[k];
            break;
          }
        }
      }
      for (int k = 0; k < len; ++k) {
        dm.entries(r, col + k) =
            static_cast<double>(counts[k]) / static_cast<double>(mode.shots);
      }
      col += len;
    }
  }
  return dm;
}

Mat chi_of_channel(const Channel& ch, const qmath::HermitianBasis& basis) {
  if (basis.dim != ch.dim) {
    throw std::invalid_argument("chi_of_channel: dimension mismatch");
  }
  const int n = ch.dim * ch.dim;
  Mat chi = Mat::Zero(n, n);
  for (const Mat& k : ch.kraus) {
    Vec coeff(n);
    for (int i = 0; i < n; ++i) {
      coeff(i) = (basis.elems[i].adjoint() * k).trace() / 2.0;
    }
    chi += coeff * coeff.adjoint();
  }
  return chi / chi.trace().real();
}

void save_csv(std::ostream& out, const DetectionMatrix& dm) {
  out << "# dim=" << dm.dim << " protocol=" << dm.protocol << " mode="
      << (dm.sampled ? "sampled" : "analytic") << " shots=" << dm.shots
      << " seed=" << dm.seed << '\n';
  out << "# contexts: ";
  for (std::size_t c = 0; c < dm.contexts.size(); ++c) {
    if (c) out << ';';
    out << dm.contexts[c].id << '=';
    for (std::size_t l = 0; l < dm.contexts[c].labels.size(); ++l) {
      if (l) out << '|';
      out << dm.contexts[c].labels[l];
    }
    if (dm.contexts[c].weight != 1.0) out << '@' << fmt17(dm.contexts[c].weight);
  }
  out << '\n';
  out << "row";
  for (const auto& ctx : dm.contexts) {
    for (const auto& label : ctx.labels) out << ',' << ctx.id << ':' << label;
  }
  out << '\n';
  for (Eigen::Index r = 0; r < dm.entries.rows(); ++r) {
    out << dm.row_labels[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < dm.entries.cols(); ++c) {
      out << ',' << fmt17(dm.entries(r, c));
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.pop_back();
  }
  return s;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ParseError("detection matrix CSV, line " + std::to_string(line) + ": " + what);
}

}  // namespace

DetectionMatrix load_csv(std::istream& in) {
  DetectionMatrix dm;
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line)) fail(1, "empty file, expected '# dim=...' header");
  ++lineno;
  line = rstrip(line);
  {
    std::istringstream hs(line);
    std::string hash;
    hs >> hash;
    if (hash != "#") fail(lineno, "expected '# dim=...' header");
    std::string field;
    bool saw_dim = false;
    while (hs >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) fail(lineno, "malformed header field '" + field + "'");
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      try {
        if (key == "dim") {
          dm.dim = std::stoi(value);
          saw_dim = true;
        } else if (key == "protocol") {
          dm.protocol = value;
        } else if (key == "mode") {
          if (value != "analytic" && value != "sampled") {
            fail(lineno, "unknown mode '" + value + "'");
          }
          dm.sampled = value == "sampled";
        } else if (key == "shots") {
          dm.shots = std::stol(value);
        } else if (key == "seed") {
          dm.seed = std::stoull(value);
        } else {
          fail(lineno, "unknown header key '" + key + "'");
        }
      } catch (const ParseError&) {
        throw;
      } catch (const std::exception&) {
        fail(lineno, "bad value for '" + key + "'");
      }
    }
    if (!saw_dim) fail(lineno, "header missing dim=");
  }

  if (!std::getline(in, line)) fail(2, "missing '# contexts:' line");
  ++lineno;
  line = rstrip(line);
  {
    const std::string prefix = "# contexts: ";
    if (line.rfind(prefix, 0) != 0) fail(lineno, "expected '# contexts: ' line");
    for (const std::string& part : split(line.substr(prefix.size()), ';')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos) fail(lineno, "malformed context '" + part + "'");
      Context ctx;
      ctx.id = part.substr(0, eq);
      std::string rest = part.substr(eq + 1);
      const auto at = rest.find('@');
      if (at != std::string::npos) {
        try {
          ctx.weight = std::stod(rest.substr(at + 1));
        } catch (const std::exception&) {
          fail(lineno, "bad context weight in '" + part + "'");
        }
        rest = rest.substr(0, at);
      }
      ctx.labels = split(rest, '|');
      if (ctx.id.empty() || ctx.labels.empty() || ctx.labels.front().empty()) {
        fail(lineno, "malformed context '" + part + "'");
      }
      for (const auto& prev : dm.contexts) {
        if (prev.id == ctx.id) fail(lineno, "duplicate context id '" + ctx.id + "'");
      }
      dm.contexts.push_back(std::move(ctx));
    }
  }

  if (!std::getline(in, line)) fail(3, "missing column header");
  ++lineno;
  line = rstrip(line);
  {
    const auto cols = split(line, ',');
    if (cols.empty() || cols[0] != "row") fail(lineno, "column header must start with 'row'");
    std::size_t expect = 1;
    for (const auto& ctx : dm.contexts) {
      for (const auto& label : ctx.labels) {
        if (expect >= cols.size()) fail(lineno, "column header shorter than context map");
        const std::string want = ctx.id + ':' + label;
        if (cols[expect] != want) {
          const auto colon = cols[expect].find(':');
          const std::string tag =
              colon == std::string::npos ? cols[expect] : cols[expect].substr(0, colon);
          bool known = false;
          for (const auto& c : dm.contexts) known = known || c.id == tag;
          if (!known) fail(lineno, "unknown context tag '" + tag + "'");
          fail(lineno, "column " + std::to_string(expect + 1) + " is '" + cols[expect] +
                           "', expected '" + want + "'");
        }
        ++expect;
      }
    }
    if (expect != cols.size()) fail(lineno, "column header longer than context map");
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    line = rstrip(line);
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    const std::size_t want = 1 + static_cast<std::size_t>(dm.cols());
    if (parts.size() != want) {
      fail(lineno, "expected " + std::to_string(want) + " fields, got " +
                       std::to_string(parts.size()));
    }
    dm.row_labels.push_back(parts[0]);
    std::vector<double> values;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(parts[i], &used));
        if (used != parts[i].size()) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        fail(lineno, "bad number in column " + std::to_string(i + 1) + ": '" + parts[i] + "'");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) fail(lineno + 1, "no data rows");
  dm.entries = Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), dm.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < dm.cols(); ++c) {
      dm.entries(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
  }
  if (dm.entries.minCoeff() < -1e-12 || dm.entries.maxCoeff() > 1.0 + 1e-9) {
    throw ParseError("detection matrix CSV: entries must be probabilities in [0,1]");
  }
  for (Eigen::Index r = 0; r < dm.entries.rows(); ++r) {
    for (std::size_t c = 0; c < dm.contexts.size(); ++c) {
      if (dm.context_mass(static_cast<int>(r), static_cast<int>(c)) > 1.0 + 1e-9) {
        throw ParseError("detection matrix CSV: row " + dm.row_labels[static_cast<std::size_t>(r)] +
                         " exceeds unit mass in context '" + dm.contexts[c].id + "'");
      }
    }
  }
  return dm;
}

}  // namespace qkd::channel
