// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qkd/cli.hpp"
#include "qkd/keyrate.hpp"
#include "qkd/protocols.hpp"
#include "qkd/states.hpp"
#include "qkd/tomography.hpp"

using namespace qkd;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

// Each criterion body returns pass/fail and may append measured values to
// `detail` for the log.
void criterion(int number, const std::string& name,
               const std::function<bool(std::string&)>& body) {
  bool ok = false;
  std::string detail;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  std::printf("[%s] criterion %2d: %s%s%s%s\n", ok ? "PASS" : "FAIL", number,
              name.c_str(), detail.empty() ? "" : " [", detail.c_str(),
              detail.empty() ? "" : "]");
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

bool close(double got, double want, double tol) { return std::abs(got - want) <= tol; }

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void append(std::string& detail, double x) {
  if (!detail.empty()) detail += ' ';
  detail += num(x);
}

tomo::JointProbMatrix load_pexp() {
  std::ifstream f(std::string(QKDLAB_SOURCE_DIR) + "/data/singapore_pexp_d2.csv");
  if (!f) throw std::runtime_error("missing data/singapore_pexp_d2.csv");
  tomo::JointProbMatrix p(4, 4);
  std::string line;
  std::getline(f, line);
  for (int r = 0; r < 4; ++r) {
    std::getline(f, line);
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 4; ++c) {
      std::getline(ss, cell, ',');
      p(r, c) = std::stod(cell);
    }
  }
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  criterion(1, "reference key rates to +/-0.0005", [](std::string& detail) {
    const double values[5] = {keyrate::rate_bb84(2, 0.00628), keyrate::rate_bb84(4, 0.0351),
                              keyrate::rate_bb84(8, 0.109), keyrate::rate_mub(2, 0.00923),
                              keyrate::rate_mub(4, 0.0387)};
    const double expect[5] = {0.8901, 1.4500, 1.3942, 0.8727, 1.5316};
    bool ok = true;
    for (int i = 0; i < 5; ++i) {
      append(detail, values[i]);
      ok = ok && close(values[i], expect[i], 0.0005);
    }
    return ok;
  });

  criterion(2, "reference thresholds by bisection to +/-0.0001", [](std::string& detail) {
    const auto bb84 = [](int d) {
      return keyrate::threshold([d](double e) { return keyrate::rate_bb84(d, e); }, d);
    };
    const auto mub = [](int d) {
      return keyrate::threshold([d](double e) { return keyrate::rate_mub(d, e); }, d);
    };
    const double values[5] = {bb84(2), bb84(4), bb84(8), mub(2), mub(4)};
    const double expect[5] = {0.1100, 0.1893, 0.2470, 0.1262, 0.2317};
    bool ok = true;
    for (int i = 0; i < 5; ++i) {
      append(detail, values[i]);
      ok = ok && close(values[i], expect[i], 0.0001);
    }
    return ok;
  });

  criterion(3, "Singapore chain: ideal probs, MI ladder, twirl, rate",
            [](std::string& detail) {
    const auto sic = states::sic_set(2);
    const tomo::JointProbMatrix ideal =
        tomo::sic_joint_probs(tomo::singlet_state(2), sic);
    for (int k = 0; k < 4; ++k) {
      for (int l = 0; l < 4; ++l) {
        const double expect = k == l ? 0.0 : 1.0 / 12.0;
        if (!close(ideal(k, l), expect, 1e-10)) return false;
      }
    }
    const double mi_ideal = tomo::mutual_information(ideal);
    const double mi_twirled = tomo::twirled_mi(0.0137);
    const double rate = keyrate::rate_singapore_from_mi(0.388);
    append(detail, mi_ideal);
    append(detail, mi_twirled);
    append(detail, rate);
    return close(mi_ideal, 0.415, 0.001) && close(mi_twirled, 0.388, 0.001) &&
           close(rate, 0.374, 0.001);
  });

  criterion(4, "reference joint matrix reproduces I_AB = 0.408", [](std::string& detail) {
    const double mi = tomo::mutual_information_anticorrelated(load_pexp());
    append(detail, mi);
    return close(mi, 0.408, 0.001);
  });

  criterion(5, "sifted fractions over 1e5 rounds within 4 sigma", [](std::string& detail) {
    const std::vector<protocols::ProtocolSpec> specs = {
        {protocols::Family::kBb84, 2},    {protocols::Family::kMubFull, 2},
        {protocols::Family::kMubFull, 4}, {protocols::Family::kChau15, 4},
        {protocols::Family::kChau15, 8}};
    const long n = 100000;
    std::uint64_t seed = 1001;
    bool ok = true;
    for (const auto& spec : specs) {
      const auto transcript =
          protocols::run_session(spec, channel::identity_channel(spec.dim), n, seed++);
      const double rate = protocols::sifting_rate(spec).value();
      const double sigma = std::sqrt(rate * (1.0 - rate) / n);
      append(detail, transcript.sifted_fraction());
      ok = ok && std::abs(transcript.sifted_fraction() - rate) <= 4.0 * sigma;
    }
    return ok;
  });

  criterion(6, "multiphoton correction shifts the rate by < 1e-4", [](std::string& detail) {
    const double base = keyrate::rate_bb84(2, 0.00628);
    const double corrected =
        keyrate::rate_bb84_multiphoton(0.00628, keyrate::reference::kSourceDelta);
    append(detail, std::abs(base - corrected));
    return std::abs(base - corrected) < 1e-4;
  });

  criterion(7, "state certificates: MUB unbiasedness, SIC overlaps and amplitudes",
            [](std::string& detail) {
    double worst = 0.0;
    for (const int d : {2, 4, 8}) {
      const auto set = states::mub_set(d, d + 1);
      for (std::size_t a = 0; a < set.bases.size(); ++a) {
        for (std::size_t b = a + 1; b < set.bases.size(); ++b) {
          for (const Vec& u : set.bases[a].vectors) {
            for (const Vec& v : set.bases[b].vectors) {
              worst = std::max(worst, std::abs(std::norm(u.dot(v)) - 1.0 / d));
            }
          }
        }
      }
    }
    append(detail, worst);
    if (worst > 1e-8) return false;
    const auto sic = states::sic_set(2);
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = a + 1; b < 4; ++b) {
        if (std::abs(std::norm(sic.states[a].dot(sic.states[b])) - 1.0 / 3.0) > 1e-8) {
          return false;
        }
      }
    }
    std::vector<Vec> reference(4, Vec(2));
    reference[0] << cplx(0.888, 0.0), cplx(0.325, -0.325);
    reference[1] << cplx(0.325, -0.325), cplx(0.888, 0.0);
    reference[2] << cplx(0.888, 0.0), cplx(-0.325, 0.325);
    reference[3] << cplx(0.325, 0.325), cplx(0.0, -0.888);
    for (int i = 0; i < 4; ++i) {
      const Vec& got = sic.states[static_cast<std::size_t>(i)];
      cplx phase = reference[static_cast<std::size_t>(i)].dot(got);
      phase /= std::abs(phase);
      if (qmath::max_abs(Mat(got / phase - reference[static_cast<std::size_t>(i)])) > 1e-3) {
        return false;
      }
    }
    return true;
  });

  criterion(8, "process tomography round trips (analytic and sampled)",
            [](std::string& detail) {
    const auto basis = qmath::hermitian_basis(2);
    const std::vector<channel::Channel> channels = {
        channel::identity_channel(2), channel::depolarizing_channel(2, 0.05),
        channel::depolarizing_channel(2, 0.2), channel::rotation_channel(2, 0.1),
        channel::rotation_channel(2, 0.4)};
    const std::vector<protocols::ProtocolSpec> methods = {
        {protocols::Family::kMubFull, 2}, {protocols::Family::kSingapore, 2}};
    std::uint64_t seed = 5000;
    double worst_analytic = 1.0;
    double worst_sampled = 1.0;
    for (const auto& ch : channels) {
      tomo::ProcessMatrix truth;
      truth.dim = 2;
      truth.basis = basis;
      truth.chi = channel::chi_of_channel(ch, basis);
      for (const auto& method : methods) {
        const auto arr = protocols::arrangement(method);
        const auto analytic =
            channel::detection_matrix(arr.prepared, arr.contexts, ch);
        const auto fit_a =
            tomo::fit_process(analytic, arr.prepared, arr.contexts, basis, {}, true);
        worst_analytic =
            std::min(worst_analytic, tomo::reconstruction_fidelity(fit_a, truth));
        if (qmath::eig_min_hermitian(fit_a.chi) < -1e-9) return false;
      }
      const auto arr = protocols::arrangement(methods[0]);
      const auto sampled = channel::detection_matrix(arr.prepared, arr.contexts, ch,
                                                     {100000, seed++});
      const auto fit_s =
          tomo::fit_process(sampled, arr.prepared, arr.contexts, basis, {}, true);
      worst_sampled = std::min(worst_sampled, tomo::reconstruction_fidelity(fit_s, truth));
      if (qmath::eig_min_hermitian(fit_s.chi) < -1e-9) return false;
    }
    append(detail, worst_analytic);
    append(detail, worst_sampled);
    return worst_analytic >= 0.9999 && worst_sampled >= 0.999;
  });

  criterion(9, "Chau15 estimators: brute-force identity and exact zeros",
            [](std::string& detail) {
    const gf2n::Field gf4(2);
    const auto arr = protocols::arrangement({protocols::Family::kChau15, 4});
    const auto pairs = states::chau_pairs(4);

    const auto ident = channel::detection_matrix(arr.prepared, arr.contexts,
                                                 channel::identity_channel(4));
    const auto zero = protocols::chau_error_rates(ident);
    if (zero.e_b != 0.0 || std::abs(zero.e_d) > 1e-12) return false;

    std::mt19937_64 rng(424242);
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::MatrixXd probs(4, 4);
      for (int u = 0; u < 4; ++u) {
        for (int v = 0; v < 4; ++v) {
          probs(u, v) = static_cast<double>(rng() >> 11) * 0x1.0p-53 + 1e-3;
        }
      }
      probs /= probs.sum();
      const auto dm = channel::detection_matrix(arr.prepared, arr.contexts,
                                                channel::pauli_channel(gf4, probs));
      const auto rates = protocols::chau_error_rates(dm);
      double eb = 0.0, ed = 0.0;
      for (const auto& [i, j] : pairs) {
        double stay = 0.0, flip = 0.0, out = 0.0;
        for (unsigned u = 0; u < 4; ++u) {
          for (unsigned v = 0; v < 4; ++v) {
            if (u == 0 || u == (i ^ j)) {
              if (gf4.trace(gf4.mul(v, i ^ j)) == 1) {
                flip += probs(static_cast<int>(u), static_cast<int>(v));
              } else {
                stay += probs(static_cast<int>(u), static_cast<int>(v));
              }
            } else {
              out += probs(static_cast<int>(u), static_cast<int>(v));
            }
          }
        }
        eb += flip / (flip + stay);
        ed += out;
      }
      eb /= static_cast<double>(pairs.size());
      ed /= static_cast<double>(pairs.size());
      append(detail, std::abs(rates.e_b - eb));
      append(detail, std::abs(rates.e_d - ed));
      if (std::abs(rates.e_b - eb) > 1e-9 || std::abs(rates.e_d - ed) > 1e-9) return false;
    }
    return true;
  });

  criterion(10, "determinism: byte-identical CLI reruns and transport equivalence",
            [](std::string&) {
    const fs::path base = fs::temp_directory_path() / "qkdlab_acceptance";
    fs::remove_all(base);
    cli::RunConfig cfg;
    cfg.protocol = "chau15";
    cfg.dim = 4;
    cfg.noise = "depolarizing:0.1";
    cfg.rounds = 5000;
    cfg.shots = 20000;
    cfg.seed = 31337;
    cfg.format = "json";
    std::ostringstream err;
    cfg.out_dir = (base / "a").string();
    std::ostringstream out_a;
    if (cli::cmd_run(cfg, out_a, err) != 0) return false;
    cfg.out_dir = (base / "b").string();
    std::ostringstream out_b;
    if (cli::cmd_run(cfg, out_b, err) != 0) return false;
    if (out_a.str() != out_b.str()) return false;
    for (const char* name :
         {"detection_matrix.csv", "transcript.txt", "messages.txt", "summary.json"}) {
      if (slurp(base / "a" / name) != slurp(base / "b" / name)) return false;
    }

    for (const auto& spec : std::vector<protocols::ProtocolSpec>{
             {protocols::Family::kBb84, 2},
             {protocols::Family::kMubFull, 4},
             {protocols::Family::kChau15, 4},
             {protocols::Family::kSingapore, 2}}) {
      const auto ch = channel::depolarizing_channel(spec.dim, 0.07);
      auto inproc = transport::inproc_pair();
      auto stream = transport::stream_loopback_pair();
      const auto a = protocols::run_session(spec, ch, 2000, 77, inproc);
      const auto b = protocols::run_session(spec, ch, 2000, 77, stream);
      if (!(a == b)) return false;
    }
    return true;
  });

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
  } else {
    std::printf("%d criteria failed\n", g_failures);
  }
  return g_failures;
}
