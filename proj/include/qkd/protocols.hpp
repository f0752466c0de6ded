#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/transport.hpp"

// Protocol engines: round generation, classical sifting, raw-key
// extraction, error-rate estimators, sifting rates, and photon-source
// statistics.
namespace qkd::protocols {

enum class Family { kBb84, kMubFull, kSingapore, kChau15 };

Family family_from_tag(const std::string& tag);  // bb84|mub|singapore|chau15
std::string family_tag(Family family);

struct ProtocolSpec {
  Family family = Family::kBb84;
  int dim = 2;
  void validate() const;  // throws on unsupported (family, dim)
  std::string tag() const { return family_tag(family); }
};

struct Rational {
  long num = 0;
  long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// BB84 -> 1/2; full MUB -> 1/(d+1); Chau15 -> 2/(d^2-d); Singapore -> 1.
Rational sifting_rate(const ProtocolSpec& spec);

// Prepared states and measurement contexts of a protocol, in the fixed
// order used by sessions, detection matrices, and the CSV layout.
struct Arrangement {
  std::vector<channel::Prepared> prepared;
  std::vector<int> prep_context;  // context index per prepared state
  std::vector<int> prep_symbol;   // symbol within that context
  std::vector<channel::Context> contexts;
};
Arrangement arrangement(const ProtocolSpec& spec);

struct RoundRecord {
  long round_id = 0;
  int alice_context = 0;
  int alice_symbol = 0;
  int bob_context = 0;
  int bob_outcome = -1;  // -1 = no click
  bool sifted = false;
  int key_alice = -1;
  int key_bob = -1;
  bool operator==(const RoundRecord&) const = default;
};

struct SessionTranscript {
  ProtocolSpec spec;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
  std::vector<transport::Message> messages;
  double sifted_fraction() const;
  bool operator==(const SessionTranscript& other) const {
    return spec.family == other.spec.family && spec.dim == other.spec.dim &&
           seed == other.seed && rounds == other.rounds && messages == other.messages;
  }
};

struct SessionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Seeded prepare-and-measure session. Classical announcements flow through
// the transport pair; a transport failure surfaces as a SessionError
// naming the round. Identical seeds give identical transcripts regardless
// of the transport binding.
SessionTranscript run_session(const ProtocolSpec& spec, const channel::Channel& ch,
                              long n_rounds, std::uint64_t seed,
                              transport::Pair& link);
SessionTranscript run_session(const ProtocolSpec& spec, const channel::Channel& ch,
                              long n_rounds, std::uint64_t seed);

// Kept subset with key symbols set.
std::vector<RoundRecord> sift(const ProtocolSpec& spec,
                              const std::vector<RoundRecord>& rounds);

// Fraction of sifted rounds with mismatched key symbols (Singapore: excess
// of matched-index outcomes over the ideal 1/2; see qber on matrices).
double qber(const ProtocolSpec& spec, const std::vector<RoundRecord>& rounds);

// Probability-weighted detection-matrix form, averaged uniformly over
// prepared states. Singapore uses 1 - 2 * (matched-index mass / context
// mass) so the identity channel gives exactly 0.
double qber(const ProtocolSpec& spec, const channel::DetectionMatrix& dm);

// Same estimator broken down by measurement context (basis, pair, POVM).
std::vector<std::pair<std::string, double>> qber_per_context(
    const ProtocolSpec& spec, const channel::DetectionMatrix& dm);

struct PairRates {
  std::string pair_id;
  double e_b = 0.0;
  double e_d = 0.0;
};

struct ErrorRates {
  double e_raw = 0.0;
  double e_b = 0.0;
  double e_d = 0.0;
  std::vector<PairRates> per_pair;
};

// Chau15 estimators from a (pair, sign)-structured matrix: e_b averages,
// per pair, the wrong-sign mass within the matching 2x2 block renormalized
// by the block mass; e_d averages 1 - (in-block mass) per row.
ErrorRates chau_error_rates(const channel::DetectionMatrix& dm);

// g2(0) = (N_ABC N_C) / (N_AC N_BC).
double g2_estimate(double n_abc, double n_c, double n_ac, double n_bc);

// Multiphoton-rate bound Delta = (mu^2 g2 / 2) / Q.
double multiphoton_delta(double mu, double g2, double gain);

struct SourceStats {
  double g2 = 0.0;
  double mu = 0.0;
  double gain = 0.0;
  double delta = 0.0;
};

void save_transcript(std::ostream& out, const SessionTranscript& t);
void save_messages(std::ostream& out, const SessionTranscript& t);

}  // namespace qkd::protocols
