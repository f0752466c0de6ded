#include "qkd/protocols.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "qkd/states.hpp"

namespace qkd::protocols {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

long uniform_index(std::mt19937_64& rng, long n) {
  return static_cast<long>(rng() % static_cast<std::uint64_t>(n));
}

}  // namespace

Family family_from_tag(const std::string& tag) {
  if (tag == "bb84") return Family::kBb84;
  if (tag == "mub") return Family::kMubFull;
  if (tag == "singapore") return Family::kSingapore;
  if (tag == "chau15") return Family::kChau15;
  throw std::invalid_argument("unknown protocol '" + tag + "'");
}

std::string family_tag(Family family) {
  switch (family) {
    case Family::kBb84:
      return "bb84";
    case Family::kMubFull:
      return "mub";
    case Family::kSingapore:
      return "singapore";
    case Family::kChau15:
      return "chau15";
  }
  throw std::invalid_argument("bad protocol family");
}

void ProtocolSpec::validate() const {
  const bool ok = (family == Family::kBb84 && (dim == 2 || dim == 4 || dim == 8)) ||
                  (family == Family::kMubFull && (dim == 2 || dim == 4)) ||
                  (family == Family::kSingapore && dim == 2) ||
                  (family == Family::kChau15 && (dim == 4 || dim == 8));
  if (!ok) {
    throw std::invalid_argument("unsupported combination: protocol " + tag() +
                                " with dim " + std::to_string(dim));
  }
}

Rational sifting_rate(const ProtocolSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case Family::kBb84:
      return {1, 2};
    case Family::kMubFull:
      return {1, spec.dim + 1};
    case Family::kChau15:
      // 2/(d^2 - d) in lowest terms; d(d-1)/2 is the number of pairs
      return {1, static_cast<long>(spec.dim) * (spec.dim - 1) / 2};
    case Family::kSingapore:
      return {1, 1};
  }
  throw std::invalid_argument("bad protocol family");
}

Arrangement arrangement(const ProtocolSpec& spec) {
  spec.validate();
  Arrangement arr;
  switch (spec.family) {
    case Family::kBb84:
    case Family::kMubFull: {
      const int m = spec.family == Family::kBb84 ? 2 : spec.dim + 1;
      const states::MubSet mubs = states::mub_set(spec.dim, m);
      for (int b = 0; b < m; ++b) {
        channel::Context ctx;
        ctx.id = mubs.bases[static_cast<std::size_t>(b)].label;
        for (int s = 0; s < spec.dim; ++s) {
          ctx.labels.push_back(std::to_string(s));
          ctx.projectors.push_back(mubs.bases[static_cast<std::size_t>(b)].vectors[static_cast<std::size_t>(s)]);
        }
        arr.contexts.push_back(std::move(ctx));
      }
      break;
    }
    case Family::kSingapore: {
      const states::SicSet sic = states::sic_set(spec.dim);
      channel::Context ctx;
      ctx.id = "sic";
      ctx.weight = 1.0 / spec.dim;
      for (int j = 0; j < spec.dim; ++j) {
        for (int k = 0; k < spec.dim; ++k) {
          ctx.labels.push_back(std::to_string(j) + std::to_string(k));
          ctx.projectors.push_back(sic.at(j, k));
        }
      }
      arr.contexts.push_back(std::move(ctx));
      break;
    }
    case Family::kChau15: {
      for (const auto& [i, j] : states::chau_pairs(spec.dim)) {
        channel::Context ctx;
        ctx.id = "p" + std::to_string(i) + std::to_string(j);
        ctx.labels = {"+", "-"};
        ctx.projectors = {states::chau_state({i, j, 0}, spec.dim),
                          states::chau_state({i, j, 1}, spec.dim)};
        arr.contexts.push_back(std::move(ctx));
      }
      break;
    }
  }
  for (std::size_t c = 0; c < arr.contexts.size(); ++c) {
    const auto& ctx = arr.contexts[c];
    for (std::size_t s = 0; s < ctx.labels.size(); ++s) {
      arr.prepared.push_back({ctx.id + ":" + ctx.labels[s], ctx.projectors[s]});
      arr.prep_context.push_back(static_cast<int>(c));
      arr.prep_symbol.push_back(static_cast<int>(s));
    }
  }
  return arr;
}

double SessionTranscript::sifted_fraction() const {
  if (rounds.empty()) return 0.0;
  long kept = 0;
  for (const auto& r : rounds) kept += r.sifted ? 1 : 0;
  return static_cast<double>(kept) / static_cast<double>(rounds.size());
}

namespace {

bool round_sifts(Family family, const RoundRecord& r) {
  if (r.bob_outcome < 0) return false;
  if (family == Family::kSingapore) return true;
  return r.alice_context == r.bob_context;
}

void fill_keys(RoundRecord& r) {
  if (r.sifted) {
    r.key_alice = r.alice_symbol;
    r.key_bob = r.bob_outcome;
  } else {
    r.key_alice = -1;
    r.key_bob = -1;
  }
}

transport::Message relay(transport::Endpoint& from, transport::Endpoint& to,
                         const transport::Message& m, long round_id) {
  try {
    from.send(m);
    return to.receive();
  } catch (const transport::TransportError& e) {
    throw SessionError("transport failure at round " + std::to_string(round_id) +
                       ": " + e.what());
  }
}

}  // namespace

SessionTranscript run_session(const ProtocolSpec& spec, const channel::Channel& ch,
                              long n_rounds, std::uint64_t seed,
                              transport::Pair& link) {
  spec.validate();
  if (n_rounds <= 0) throw std::invalid_argument("run_session: n_rounds must be > 0");
  if (ch.dim != spec.dim) throw std::invalid_argument("run_session: channel dimension mismatch");

  const Arrangement arr = arrangement(spec);
  const int n_ctx = static_cast<int>(arr.contexts.size());

  // Born-rule outcome distributions for every (prepared, context) pair;
  // rounds then just sample these cached tables.
  std::vector<std::vector<std::vector<double>>> cumulative(arr.prepared.size());
  for (std::size_t p = 0; p < arr.prepared.size(); ++p) {
    const Mat rho = channel::apply(ch, qmath::projector(arr.prepared[p].state));
    cumulative[p].resize(static_cast<std::size_t>(n_ctx));
    for (int c = 0; c < n_ctx; ++c) {
      const auto& ctx = arr.contexts[static_cast<std::size_t>(c)];
      double acc = 0.0;
      for (const Vec& proj : ctx.projectors) {
        acc += ctx.weight * std::real(proj.dot(rho * proj));
        cumulative[p][static_cast<std::size_t>(c)].push_back(acc);
      }
    }
  }

  SessionTranscript t;
  t.spec = spec;
  t.seed = seed;
  t.rounds.reserve(static_cast<std::size_t>(n_rounds));
  std::mt19937_64 rng(seed);

  const bool announces = spec.family != Family::kSingapore;
  const transport::Kind announce_kind = spec.family == Family::kChau15
                                            ? transport::Kind::kPairAnnounce
                                            : transport::Kind::kBasisAnnounce;
  const auto pairs = spec.family == Family::kChau15
                         ? states::chau_pairs(spec.dim)
                         : std::vector<std::pair<unsigned, unsigned>>{};

  for (long round = 0; round < n_rounds; ++round) {
    RoundRecord r;
    r.round_id = round;
    r.alice_context = static_cast<int>(uniform_index(rng, n_ctx));
    const auto& actx = arr.contexts[static_cast<std::size_t>(r.alice_context)];
    r.alice_symbol = static_cast<int>(uniform_index(rng, static_cast<long>(actx.labels.size())));
    r.bob_context = static_cast<int>(uniform_index(rng, n_ctx));

    int prep = 0;
    for (int c = 0; c < r.alice_context; ++c) {
      prep += static_cast<int>(arr.contexts[static_cast<std::size_t>(c)].labels.size());
    }
    prep += r.alice_symbol;
    const auto& cum = cumulative[static_cast<std::size_t>(prep)][static_cast<std::size_t>(r.bob_context)];
    const double total = cum.back();
    const double u = uniform01(rng);
    r.bob_outcome = -1;
    for (std::size_t k = 0; k < cum.size(); ++k) {
      if (u < cum[k]) {
        r.bob_outcome = static_cast<int>(k);
        break;
      }
    }
    // complete contexts can leave a ~1e-16 residual; fold it into the
    // last outcome instead of inventing a no-click
    if (r.bob_outcome < 0 && total > 1.0 - 1e-9) {
      r.bob_outcome = static_cast<int>(cum.size()) - 1;
    }

    if (announces) {
      std::vector<int> alice_payload;
      std::vector<int> bob_payload;
      if (spec.family == Family::kChau15) {
        const auto& ap = pairs[static_cast<std::size_t>(r.alice_context)];
        const auto& bp = pairs[static_cast<std::size_t>(r.bob_context)];
        alice_payload = {static_cast<int>(ap.first), static_cast<int>(ap.second)};
        bob_payload = {static_cast<int>(bp.first), static_cast<int>(bp.second)};
      } else {
        alice_payload = {r.alice_context};
        bob_payload = {r.bob_context};
      }
      t.messages.push_back(relay(*link.alice, *link.bob,
                                 {round, transport::Sender::kAlice, announce_kind, alice_payload},
                                 round));
      t.messages.push_back(relay(*link.bob, *link.alice,
                                 {round, transport::Sender::kBob, announce_kind, bob_payload},
                                 round));
    }

    r.sifted = round_sifts(spec.family, r);
    fill_keys(r);

    if (announces) {
      t.messages.push_back(relay(*link.alice, *link.bob,
                                 {round, transport::Sender::kAlice,
                                  transport::Kind::kSiftDecision, {r.sifted ? 1 : 0}},
                                 round));
    }
    t.rounds.push_back(r);
  }

  t.messages.push_back(relay(*link.alice, *link.bob,
                             {n_rounds, transport::Sender::kAlice,
                              transport::Kind::kSessionEnd, {}},
                             n_rounds));
  t.messages.push_back(relay(*link.bob, *link.alice,
                             {n_rounds, transport::Sender::kBob,
                              transport::Kind::kSessionEnd, {}},
                             n_rounds));
  link.alice->close();
  link.bob->close();
  return t;
}

SessionTranscript run_session(const ProtocolSpec& spec, const channel::Channel& ch,
                              long n_rounds, std::uint64_t seed) {
  transport::Pair link = transport::inproc_pair();
  return run_session(spec, ch, n_rounds, seed, link);
}

std::vector<RoundRecord> sift(const ProtocolSpec& spec,
                              const std::vector<RoundRecord>& rounds) {
  spec.validate();
  std::vector<RoundRecord> kept;
  for (RoundRecord r : rounds) {
    r.sifted = round_sifts(spec.family, r);
    if (!r.sifted) continue;
    fill_keys(r);
    kept.push_back(r);
  }
  return kept;
}

double qber(const ProtocolSpec& spec, const std::vector<RoundRecord>& rounds) {
  const auto kept = sift(spec, rounds);
  if (kept.empty()) throw std::invalid_argument("qber: no sifted rounds");
  long mismatch = 0;
  for (const auto& r : kept) mismatch += r.key_alice != r.key_bob ? 1 : 0;
  const double frac = static_cast<double>(mismatch) / static_cast<double>(kept.size());
  if (spec.family == Family::kSingapore) {
    return 1.0 - 2.0 * (1.0 - frac);
  }
  return frac;
}

namespace {

std::vector<std::pair<std::string, double>> qber_breakdown(
    const ProtocolSpec& spec, const channel::DetectionMatrix& dm) {
  const Arrangement arr = arrangement(spec);
  if (dm.row_labels.size() != arr.prepared.size() ||
      dm.contexts.size() != arr.contexts.size()) {
    throw std::invalid_argument("qber: matrix layout does not match protocol");
  }
  std::vector<double> sums(arr.contexts.size(), 0.0);
  std::vector<long> counts(arr.contexts.size(), 0);
  for (std::size_t p = 0; p < arr.prepared.size(); ++p) {
    const int c = arr.prep_context[p];
    const int s = arr.prep_symbol[p];
    const int row = static_cast<int>(p);
    const double mass = dm.context_mass(row, c);
    if (mass <= 0.0) throw std::invalid_argument("qber: empty context mass");
    const double correct = dm.entries(row, dm.col_offset(c) + s);
    const double e = spec.family == Family::kSingapore ? 1.0 - 2.0 * correct / mass
                                                       : (mass - correct) / mass;
    sums[static_cast<std::size_t>(c)] += e;
    ++counts[static_cast<std::size_t>(c)];
  }
  std::vector<std::pair<std::string, double>> result;
  for (std::size_t c = 0; c < arr.contexts.size(); ++c) {
    result.emplace_back(arr.contexts[c].id, sums[c] / static_cast<double>(counts[c]));
  }
  return result;
}

}  // namespace

double qber(const ProtocolSpec& spec, const channel::DetectionMatrix& dm) {
  spec.validate();
  if (spec.family == Family::kChau15) return chau_error_rates(dm).e_b;
  const auto breakdown = qber_breakdown(spec, dm);
  double sum = 0.0;
  for (const auto& [id, e] : breakdown) sum += e;
  return sum / static_cast<double>(breakdown.size());
}

std::vector<std::pair<std::string, double>> qber_per_context(
    const ProtocolSpec& spec, const channel::DetectionMatrix& dm) {
  spec.validate();
  if (spec.family == Family::kChau15) {
    std::vector<std::pair<std::string, double>> result;
    for (const auto& pr : chau_error_rates(dm).per_pair) {
      result.emplace_back(pr.pair_id, pr.e_b);
    }
    return result;
  }
  return qber_breakdown(spec, dm);
}

ErrorRates chau_error_rates(const channel::DetectionMatrix& dm) {
  const std::size_t n_pairs = dm.contexts.size();
  if (n_pairs == 0 || dm.row_labels.size() != 2 * n_pairs) {
    throw std::invalid_argument("chau_error_rates: matrix is not (pair, sign) structured");
  }
  for (std::size_t c = 0; c < n_pairs; ++c) {
    const auto& ctx = dm.contexts[c];
    if (ctx.labels.size() != 2 || ctx.labels[0] != "+" || ctx.labels[1] != "-" ||
        dm.row_labels[2 * c] != ctx.id + ":+" || dm.row_labels[2 * c + 1] != ctx.id + ":-") {
      throw std::invalid_argument("chau_error_rates: malformed structure at context '" +
                                  ctx.id + "'");
    }
  }
  ErrorRates rates;
  for (std::size_t c = 0; c < n_pairs; ++c) {
    const int off = dm.col_offset(static_cast<int>(c));
    const int rp = static_cast<int>(2 * c);
    const int rm = rp + 1;
    const double stay = dm.entries(rp, off) + dm.entries(rm, off + 1);
    const double flip = dm.entries(rp, off + 1) + dm.entries(rm, off);
    const double block = stay + flip;
    // block mass 0 means the pair never sifts; it contributes no bit errors
    const double eb = block > 0.0 ? flip / block : 0.0;
    const double ed = 1.0 - block / 2.0;
    rates.per_pair.push_back({dm.contexts[c].id, eb, ed});
    rates.e_b += eb;
    rates.e_d += ed;
  }
  rates.e_b /= static_cast<double>(n_pairs);
  rates.e_d /= static_cast<double>(n_pairs);
  rates.e_raw = rates.e_b;
  return rates;
}

double g2_estimate(double n_abc, double n_c, double n_ac, double n_bc) {
  if (n_ac <= 0.0 || n_bc <= 0.0) {
    throw std::invalid_argument("g2_estimate: zero denominator");
  }
  return (n_abc * n_c) / (n_ac * n_bc);
}

double multiphoton_delta(double mu, double g2, double gain) {
  if (gain <= 0.0) throw std::invalid_argument("multiphoton_delta: gain must be > 0");
  return (mu * mu * g2 / 2.0) / gain;
}

void save_transcript(std::ostream& out, const SessionTranscript& t) {
  const Arrangement arr = arrangement(t.spec);
  out << "# protocol=" << t.spec.tag() << " dim=" << t.spec.dim << " seed=" << t.seed
      << " rounds=" << t.rounds.size() << '\n';
  for (const auto& r : t.rounds) {
    out << "round=" << r.round_id << " a="
        << arr.contexts[static_cast<std::size_t>(r.alice_context)].id << ':'
        << r.alice_symbol << " b="
        << arr.contexts[static_cast<std::size_t>(r.bob_context)].id << ':';
    if (r.bob_outcome < 0) {
      out << 'x';
    } else {
      out << r.bob_outcome;
    }
    out << " sift=" << (r.sifted ? 1 : 0) << " ka=";
    if (r.key_alice < 0) {
      out << '-';
    } else {
      out << r.key_alice;
    }
    out << " kb=";
    if (r.key_bob < 0) {
      out << '-';
    } else {
      out << r.key_bob;
    }
    out << '\n';
  }
}

void save_messages(std::ostream& out, const SessionTranscript& t) {
  for (const auto& m : t.messages) out << transport::encode(m) << '\n';
}

}  // namespace qkd::protocols
