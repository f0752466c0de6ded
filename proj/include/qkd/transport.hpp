#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Classical-channel plumbing: ordered, reliable message exchange between
// the Alice and Bob state machines. Two bindings share one contract: an
// in-process FIFO pair and a byte-stream pair speaking a line protocol.
namespace qkd::transport {

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Sender { kAlice, kBob };
enum class Kind { kBasisAnnounce, kPairAnnounce, kSiftDecision, kSessionEnd };

struct Message {
  long round_id = 0;
  Sender from = Sender::kAlice;
  Kind kind = Kind::kSessionEnd;
  std::vector<int> payload;
  bool operator==(const Message&) const = default;
};

// One message per line: round=<n> from=<A|B> kind=<tag> payload=<v1,v2,...>
// Trailing whitespace is tolerated; anything else malformed is rejected
// with an error naming the offending field.
std::string encode(const Message& m);
Message decode(std::string_view line);

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual void send(const Message& m) = 0;
  // Throws TransportError when nothing is pending and the peer is open;
  // returns a SESSION_END sentinel once the peer has closed and the queue
  // is drained.
  virtual Message receive() = 0;
  virtual void close() = 0;
};

struct Pair {
  std::unique_ptr<Endpoint> alice;
  std::unique_ptr<Endpoint> bob;
};

Pair inproc_pair();

// Same contract, but every message round-trips through the line protocol
// over an in-memory byte stream (the loopback binding).
Pair stream_loopback_pair();

}  // namespace qkd::transport
