#include "qkd/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "qkd/keyrate.hpp"
#include "qkd/protocols.hpp"
#include "qkd/states.hpp"
#include "qkd/tomography.hpp"

namespace qkd::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double x, const char* spec = "%.17g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::filesystem::path resolve_out_dir(const std::string& out_dir) {
  if (!out_dir.empty()) return out_dir;
  if (const char* env = std::getenv("QKDLAB_OUT")) return env;
  return ".";
}

void write_report(std::ostream& out, const std::string& format, const ordered_json& report) {
  if (format == "json") {
    out << report.dump(2) << '\n';
    return;
  }
  for (const auto& [key, value] : report.items()) {
    std::string rendered;
    if (value.is_number_float()) {
      rendered = fmt(value.get<double>());
    } else if (value.is_string()) {
      rendered = value.get<std::string>();
    } else {
      rendered = value.dump();
    }
    if (format == "csv") {
      out << key << ',' << rendered << '\n';
    } else {
      out << key << " = " << rendered << '\n';
    }
  }
}

void write_table(std::ostream& out, const std::string& format,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  if (format == "json") {
    ordered_json arr = ordered_json::array();
    for (const auto& row : rows) {
      ordered_json obj;
      for (std::size_t c = 0; c < header.size(); ++c) {
        // numeric-looking cells round-trip as numbers
        char* end = nullptr;
        const double v = std::strtod(row[c].c_str(), &end);
        if (end && *end == '\0' && !row[c].empty()) {
          obj[header[c]] = v;
        } else {
          obj[header[c]] = row[c];
        }
      }
      arr.push_back(obj);
    }
    out << arr.dump(2) << '\n';
    return;
  }
  if (format == "csv") {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
      out << '\n';
    }
    return;
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
}

tomo::JointProbMatrix load_joint_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument("junk");
      } catch (const std::exception&) {
        throw channel::ParseError("joint matrix CSV, line " + std::to_string(lineno) +
                                  ": bad number '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw channel::ParseError("joint matrix CSV: no data");
  const std::size_t n = rows.size();
  tomo::JointProbMatrix p(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != n) {
      throw channel::ParseError("joint matrix CSV: row " + std::to_string(r + 1) +
                                " has " + std::to_string(rows[r].size()) +
                                " columns, expected " + std::to_string(n));
    }
    for (std::size_t c = 0; c < n; ++c) p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return p;
}

std::vector<double> parse_floats(const std::string& list) {
  std::vector<double> values;
  std::stringstream ss(list);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    values.push_back(std::stod(cell, &used));
    if (used != cell.size()) throw std::invalid_argument("bad float '" + cell + "'");
  }
  return values;
}

}  // namespace

channel::Channel parse_noise(const std::string& spec, int dim) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "none" || name == "identity") {
    return channel::identity_channel(dim);
  }
  if (name == "depolarizing") {
    const auto v = parse_floats(args);
    if (v.size() != 1) throw std::invalid_argument("depolarizing takes one parameter");
    return channel::depolarizing_channel(dim, v[0]);
  }
  if (name == "rotation") {
    const auto v = parse_floats(args);
    if (v.size() != 1) throw std::invalid_argument("rotation takes one parameter");
    return channel::rotation_channel(dim, v[0]);
  }
  if (name == "pauli") {
    if (dim != 4 && dim != 8) {
      throw std::invalid_argument("pauli noise requires dim 4 or 8");
    }
    const gf2n::Field field(dim == 4 ? 2 : 3);
    const auto v = parse_floats(args);
    if (v.size() != static_cast<std::size_t>(dim) * dim) {
      throw std::invalid_argument("pauli noise needs d^2 probabilities");
    }
    Eigen::MatrixXd probs(dim, dim);
    for (int u = 0; u < dim; ++u) {
      for (int w = 0; w < dim; ++w) probs(u, w) = v[static_cast<std::size_t>(u) * dim + w];
    }
    return channel::pauli_channel(field, probs);
  }
  throw std::invalid_argument("unknown noise model '" + name + "'");
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    protocols::ProtocolSpec spec{protocols::family_from_tag(cfg.protocol), cfg.dim};
    spec.validate();
    const channel::Channel ch = parse_noise(cfg.noise, cfg.dim);
    const protocols::Arrangement arr = protocols::arrangement(spec);

    const protocols::SessionTranscript transcript =
        protocols::run_session(spec, ch, cfg.rounds, cfg.seed);

    channel::DetectionMatrix dm =
        cfg.shots > 0
            ? channel::detection_matrix(arr.prepared, arr.contexts, ch,
                                        channel::SampledMode{cfg.shots, cfg.seed})
            : channel::detection_matrix(arr.prepared, arr.contexts, ch);
    dm.dim = cfg.dim;
    dm.protocol = spec.tag();

    const auto out_dir = resolve_out_dir(cfg.out_dir);
    std::filesystem::create_directories(out_dir);
    {
      std::ofstream f(out_dir / "detection_matrix.csv");
      channel::save_csv(f, dm);
    }
    {
      std::ofstream f(out_dir / "transcript.txt");
      protocols::save_transcript(f, transcript);
    }
    {
      std::ofstream f(out_dir / "messages.txt");
      protocols::save_messages(f, transcript);
    }
    {
      std::ofstream f(out_dir / "states.csv");
      std::vector<std::pair<std::string, Vec>> rows;
      for (const auto& p : arr.prepared) rows.emplace_back(p.label, p.state);
      states::save_states_csv(f, rows);
    }

    ordered_json report;
    report["protocol"] = spec.tag();
    report["dim"] = cfg.dim;
    report["noise"] = cfg.noise;
    report["rounds"] = cfg.rounds;
    report["seed"] = cfg.seed;
    report["mode"] = cfg.shots > 0 ? "sampled" : "analytic";
    report["sifting_expected"] = protocols::sifting_rate(spec).value();
    report["sifting_observed"] = transcript.sifted_fraction();
    report["e_raw"] = protocols::qber(spec, transcript.rounds);
    const double eb = protocols::qber(spec, dm);
    report["e_b"] = eb;
    if (spec.family == protocols::Family::kChau15) {
      const protocols::ErrorRates rates = protocols::chau_error_rates(dm);
      report["e_d"] = rates.e_d;
      report["rate_reference"] =
          cfg.dim == 4 ? keyrate::reference::kChauRateD4 : keyrate::reference::kChauRateD8;
      report["rate_note"] = "rate echoed from reference constants; formula out of scope";
    } else if (spec.family == protocols::Family::kBb84) {
      report["rate"] = keyrate::rate_bb84(cfg.dim, eb);
      if (cfg.dim == 2) {
        // multiphoton correction with the reference source statistics
        report["source_g2"] = keyrate::reference::kSourceG2;
        report["source_mu"] = keyrate::reference::kSourceMu;
        report["source_gain"] = keyrate::reference::kSourceGain;
        report["source_delta_bound"] = protocols::multiphoton_delta(
            keyrate::reference::kSourceMu, keyrate::reference::kSourceG2,
            keyrate::reference::kSourceGain);
        report["rate_multiphoton"] =
            keyrate::rate_bb84_multiphoton(eb, keyrate::reference::kSourceDelta);
      }
    } else if (spec.family == protocols::Family::kMubFull) {
      report["rate"] = keyrate::rate_mub(cfg.dim, eb);
    } else {
      report["rate_note"] = "run tomography --mi on joint data for the Singapore rate";
    }
    for (const auto& [id, e] : protocols::qber_per_context(spec, dm)) {
      report["e_b." + id] = e;
    }

    const char* summary_name = cfg.format == "json"  ? "summary.json"
                               : cfg.format == "csv" ? "summary.csv"
                                                     : "summary.txt";
    {
      std::ofstream f(out_dir / summary_name);
      write_report(f, cfg.format, report);
    }
    write_report(out, cfg.format, report);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

namespace {

std::vector<std::string> table1_row(const keyrate::RateReport& r) {
  std::vector<std::string> row;
  row.push_back(r.protocol);
  row.push_back(std::to_string(r.dim));
  row.push_back(fmt(100.0 * r.threshold, "%.2f") + "%" + (r.threshold_reference ? "*" : ""));
  row.push_back(fmt(100.0 * r.e_b, "%.3f") + "%");
  row.push_back(fmt(r.rate_zero, "%.3g"));
  row.push_back(fmt(r.rate, "%.4f") + (r.rate_reference ? "*" : ""));
  row.push_back(r.sifting.den == 1
                    ? std::to_string(r.sifting.num)
                    : std::to_string(r.sifting.num) + "/" + std::to_string(r.sifting.den));
  row.push_back(fmt(r.rate_times_sifting, "%.4f"));
  return row;
}

}  // namespace

int cmd_rates(const RatesConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.table1) {
      const auto rows = keyrate::table1_report({});
      std::vector<std::vector<std::string>> cells;
      if (cfg.format == "csv" || cfg.format == "json") {
        for (const auto& r : rows) {
          cells.push_back({r.protocol, std::to_string(r.dim), fmt(r.threshold),
                           fmt(r.e_b), fmt(r.rate_zero), fmt(r.rate),
                           fmt(r.sifting.value()), fmt(r.rate_times_sifting)});
        }
        write_table(out, cfg.format,
                    {"protocol", "dim", "eb_max", "eb", "rate0", "rate", "sifting",
                     "rate_x_sifting"},
                    cells);
      } else {
        for (const auto& r : rows) cells.push_back(table1_row(r));
        write_table(out, cfg.format,
                    {"protocol", "d", "eb_max", "eb_exp", "R(0)", "R_exp", "sifting",
                     "RxSifting"},
                    cells);
        out << "* reference value, not recomputed\n";
      }
      return 0;
    }
    const protocols::Family family = protocols::family_from_tag(cfg.protocol);
    double rate = 0.0;
    switch (family) {
      case protocols::Family::kBb84:
        if (cfg.delta >= 0.0 && cfg.dim != 2) {
          throw std::invalid_argument("--delta applies the d=2 multiphoton formula");
        }
        rate = cfg.delta >= 0.0 ? keyrate::rate_bb84_multiphoton(cfg.e_b, cfg.delta)
                                : keyrate::rate_bb84(cfg.dim, cfg.e_b);
        break;
      case protocols::Family::kMubFull:
        rate = keyrate::rate_mub(cfg.dim, cfg.e_b);
        break;
      case protocols::Family::kSingapore:
        throw std::invalid_argument(
            "singapore rates derive from mutual information; use rates --protocol "
            "singapore --mi via tomography, or table1");
      case protocols::Family::kChau15:
        throw std::invalid_argument("chau15 rate formula is out of scope; see rates --table1");
    }
    ordered_json report;
    report["protocol"] = cfg.protocol;
    report["dim"] = cfg.dim;
    report["e_b"] = cfg.e_b;
    if (cfg.delta >= 0.0) report["delta"] = cfg.delta;
    report["rate"] = rate;
    write_report(out, cfg.format, report);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_thresholds(const std::string& format, std::ostream& out, std::ostream& err) {
  try {
    std::vector<std::vector<std::string>> rows;
    auto add = [&rows, &format](const std::string& name, int dim, double value, bool ref) {
      if (format == "csv" || format == "json") {
        rows.push_back({name, std::to_string(dim), fmt(value), ref ? "reference" : "computed"});
      } else {
        rows.push_back({name, std::to_string(dim), fmt(100.0 * value, "%.2f") + "%" + (ref ? "*" : ""),
                        ref ? "reference" : "computed"});
      }
    };
    for (const int d : {2, 4, 8}) {
      add("bb84", d, keyrate::threshold([d](double e) { return keyrate::rate_bb84(d, e); }, d),
          false);
    }
    for (const int d : {2, 4}) {
      add("mub", d, keyrate::threshold([d](double e) { return keyrate::rate_mub(d, e); }, d),
          false);
    }
    add("singapore", 2, keyrate::reference::kSingaporeThreshold, true);
    add("chau15", 4, keyrate::reference::kChauThreshold, true);
    add("chau15", 8, keyrate::reference::kChauThreshold, true);
    write_table(out, format, {"protocol", "dim", "eb_max", "source"}, rows);
    if (format != "csv" && format != "json") out << "* reference value, not recomputed\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_tomography(const TomographyConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.mi) {
      if (cfg.input.empty()) throw std::invalid_argument("--mi requires --input");
      std::ifstream f(cfg.input);
      if (!f) throw std::invalid_argument("cannot open '" + cfg.input + "'");
      const tomo::JointProbMatrix p = load_joint_csv(f);
      const tomo::TwirlResult tw = tomo::twirl(p);
      ordered_json report;
      report["input"] = cfg.input;
      report["mi"] = tomo::mutual_information(p);
      report["mi_anticorrelated"] = tomo::mutual_information_anticorrelated(p);
      report["epsilon"] = tw.epsilon;
      report["mi_twirled"] = tomo::mutual_information(tw.matrix);
      report["rate"] = keyrate::rate_singapore_from_mi(tomo::mutual_information(tw.matrix));
      report["mi_ideal_d2"] = keyrate::reference::kSingaporeMiLadder[0];
      report["mi_ideal_d3"] = keyrate::reference::kSingaporeMiLadder[1];
      report["mi_ideal_d4"] = keyrate::reference::kSingaporeMiLadder[2];
      write_report(out, cfg.format, report);
      return 0;
    }

    protocols::ProtocolSpec spec;
    spec.dim = cfg.dim;
    if (cfg.method == "mub") {
      spec.family = protocols::Family::kMubFull;
    } else if (cfg.method == "sic") {
      spec.family = protocols::Family::kSingapore;
    } else {
      throw std::invalid_argument("unknown method '" + cfg.method + "'");
    }
    spec.validate();
    const protocols::Arrangement arr = protocols::arrangement(spec);

    channel::DetectionMatrix dm;
    std::string source;
    if (!cfg.input.empty()) {
      std::ifstream f(cfg.input);
      if (!f) throw std::invalid_argument("cannot open '" + cfg.input + "'");
      dm = channel::load_csv(f);
      if (dm.dim != cfg.dim) throw std::invalid_argument("input dim does not match --dim");
      if (dm.row_labels.size() != arr.prepared.size()) {
        throw std::invalid_argument(
            "input rows do not match the informationally complete set for method '" +
            cfg.method + "' (need " + std::to_string(arr.prepared.size()) + " prepared states)");
      }
      source = cfg.input;
    } else {
      const channel::Channel ch = parse_noise(cfg.synthetic.empty() ? "none" : cfg.synthetic,
                                              cfg.dim);
      dm = cfg.shots > 0 ? channel::detection_matrix(arr.prepared, arr.contexts, ch,
                                                     channel::SampledMode{cfg.shots, cfg.seed})
                         : channel::detection_matrix(arr.prepared, arr.contexts, ch);
      dm.dim = cfg.dim;
      dm.protocol = spec.tag();
      source = "synthetic:" + (cfg.synthetic.empty() ? std::string("none") : cfg.synthetic);
    }

    const qmath::HermitianBasis basis = qmath::hermitian_basis(cfg.dim);
    tomo::MleConfig mle;
    mle.seed = cfg.seed;
    const tomo::ProcessMatrix chi =
        tomo::fit_process(dm, arr.prepared, arr.contexts, basis, mle,
                          !cfg.non_trace_preserving);

    tomo::ProcessMatrix ideal;
    ideal.dim = cfg.dim;
    ideal.basis = basis;
    ideal.chi = Mat::Zero(cfg.dim * cfg.dim, cfg.dim * cfg.dim);
    ideal.chi(0, 0) = 1.0;

    ordered_json report;
    report["source"] = source;
    report["method"] = cfg.method;
    report["dim"] = cfg.dim;
    report["mode"] = dm.sampled ? "sampled" : "analytic";
    report["trace_preserving"] = !cfg.non_trace_preserving;
    report["fidelity_vs_identity"] = tomo::process_fidelity(chi, ideal);
    if (cfg.input.empty()) {
      const channel::Channel ch = parse_noise(cfg.synthetic.empty() ? "none" : cfg.synthetic,
                                              cfg.dim);
      tomo::ProcessMatrix truth;
      truth.dim = cfg.dim;
      truth.basis = basis;
      truth.chi = channel::chi_of_channel(ch, basis);
      report["reconstruction_fidelity"] = tomo::reconstruction_fidelity(chi, truth);
    }
    report["chi_min_eigenvalue"] = qmath::eig_min_hermitian(chi.chi);

    if (cfg.method == "sic") {
      // SIC data also supports the mutual-information route via the
      // singlet model built from the fitted preparation states.
      const tomo::JointProbMatrix ideal_joint =
          tomo::sic_joint_probs(tomo::singlet_state(2), states::sic_set(2));
      report["mi_ideal"] = tomo::mutual_information(ideal_joint);
    }

    const auto out_dir = resolve_out_dir(cfg.out_dir);
    std::filesystem::create_directories(out_dir);
    {
      std::ofstream f(out_dir / "chi.csv");
      tomo::save_chi_csv(f, chi);
    }
    write_report(out, cfg.format, report);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace qkd::cli
