#include "qkd/transport.hpp"

#include <deque>

namespace qkd::transport {

namespace {

const char* kind_tag(Kind k) {
  switch (k) {
    case Kind::kBasisAnnounce:
      return "BASIS_ANNOUNCE";
    case Kind::kPairAnnounce:
      return "PAIR_ANNOUNCE";
    case Kind::kSiftDecision:
      return "SIFT_DECISION";
    case Kind::kSessionEnd:
      return "SESSION_END";
  }
  throw TransportError("encode: bad kind");
}

Kind parse_kind(const std::string& tag) {
  if (tag == "BASIS_ANNOUNCE") return Kind::kBasisAnnounce;
  if (tag == "PAIR_ANNOUNCE") return Kind::kPairAnnounce;
  if (tag == "SIFT_DECISION") return Kind::kSiftDecision;
  if (tag == "SESSION_END") return Kind::kSessionEnd;
  throw TransportError("decode: unknown kind '" + tag + "'");
}

}  // namespace

std::string encode(const Message& m) {
  std::string line = "round=" + std::to_string(m.round_id);
  line += " from=";
  line += m.from == Sender::kAlice ? 'A' : 'B';
  line += " kind=";
  line += kind_tag(m.kind);
  line += " payload=";
  for (std::size_t i = 0; i < m.payload.size(); ++i) {
    if (i) line += ',';
    line += std::to_string(m.payload[i]);
  }
  return line;
}

Message decode(std::string_view line) {
  while (!line.empty() && (line.back() == ' ' || line.back() == '\t' ||
                           line.back() == '\r' || line.back() == '\n')) {
    line.remove_suffix(1);
  }
  constexpr const char* kFields[4] = {"round", "from", "kind", "payload"};
  std::string values[4];
  std::size_t pos = 0;
  for (int f = 0; f < 4; ++f) {
    const std::string prefix = std::string(kFields[f]) + '=';
    if (line.substr(pos, prefix.size()) != prefix) {
      throw TransportError(std::string("decode: missing field '") + kFields[f] + "'");
    }
    pos += prefix.size();
    std::size_t end = f < 3 ? line.find(' ', pos) : line.size();
    if (f < 3 && end == std::string_view::npos) {
      throw TransportError(std::string("decode: missing field '") + kFields[f + 1] + "'");
    }
    values[f] = std::string(line.substr(pos, end - pos));
    pos = f < 3 ? end + 1 : end;
  }
  if (pos != line.size()) {
    throw TransportError("decode: trailing garbage after payload");
  }

  Message m;
  try {
    std::size_t used = 0;
    m.round_id = std::stol(values[0], &used);
    if (used != values[0].size()) throw std::invalid_argument("junk");
  } catch (const std::exception&) {
    throw TransportError("decode: bad value for field 'round': '" + values[0] + "'");
  }
  if (m.round_id < 0) throw TransportError("decode: field 'round' must be nonnegative");
  if (values[1] == "A") {
    m.from = Sender::kAlice;
  } else if (values[1] == "B") {
    m.from = Sender::kBob;
  } else {
    throw TransportError("decode: bad value for field 'from': '" + values[1] + "'");
  }
  m.kind = parse_kind(values[2]);
  if (!values[3].empty()) {
    std::string cur;
    auto flush = [&] {
      bool ok = !cur.empty();
      for (std::size_t i = 0; i < cur.size(); ++i) {
        ok = ok && ((cur[i] >= '0' && cur[i] <= '9') || (i == 0 && cur[i] == '-'));
      }
      try {
        std::size_t used = 0;
        if (!ok) throw std::invalid_argument("junk");
        m.payload.push_back(std::stoi(cur, &used));
        if (used != cur.size()) throw std::invalid_argument("junk");
      } catch (const std::exception&) {
        throw TransportError("decode: bad value in field 'payload': '" + cur + "'");
      }
      cur.clear();
    };
    for (char c : values[3]) {
      if (c == ',') {
        flush();
      } else {
        cur += c;
      }
    }
    flush();
  }
  return m;
}

namespace {

struct InprocState {
  std::deque<Message> to_alice;
  std::deque<Message> to_bob;
  bool alice_closed = false;
  bool bob_closed = false;
};

class InprocEndpoint : public Endpoint {
 public:
  InprocEndpoint(std::shared_ptr<InprocState> state, Sender side)
      : state_(std::move(state)), side_(side) {}

  void send(const Message& m) override {
    if (closed()) throw TransportError("send on closed endpoint");
    if (m.round_id < last_round_) {
      throw TransportError("send: round id regressed from " +
                           std::to_string(last_round_) + " to " +
                           std::to_string(m.round_id));
    }
    last_round_ = m.round_id;
    inbox_of_peer().push_back(m);
  }

  Message receive() override {
    auto& inbox = side_ == Sender::kAlice ? state_->to_alice : state_->to_bob;
    if (!inbox.empty()) {
      Message m = inbox.front();
      inbox.pop_front();
      return m;
    }
    if (peer_closed()) {
      return Message{0, side_ == Sender::kAlice ? Sender::kBob : Sender::kAlice,
                     Kind::kSessionEnd, {}};
    }
    throw TransportError("receive on empty channel");
  }

  void close() override {
    (side_ == Sender::kAlice ? state_->alice_closed : state_->bob_closed) = true;
  }

 private:
  bool closed() const {
    return side_ == Sender::kAlice ? state_->alice_closed : state_->bob_closed;
  }
  bool peer_closed() const {
    return side_ == Sender::kAlice ? state_->bob_closed : state_->alice_closed;
  }
  std::deque<Message>& inbox_of_peer() {
    return side_ == Sender::kAlice ? state_->to_bob : state_->to_alice;
  }

  std::shared_ptr<InprocState> state_;
  Sender side_;
  long last_round_ = 0;
};

struct StreamState {
  std::string to_alice;  // byte FIFOs of newline-terminated lines
  std::string to_bob;
  bool alice_closed = false;
  bool bob_closed = false;
};

class StreamEndpoint : public Endpoint {
 public:
  StreamEndpoint(std::shared_ptr<StreamState> state, Sender side)
      : state_(std::move(state)), side_(side) {}

  void send(const Message& m) override {
    if (closed()) throw TransportError("send on closed endpoint");
    if (m.round_id < last_round_) {
      throw TransportError("send: round id regressed from " +
                           std::to_string(last_round_) + " to " +
                           std::to_string(m.round_id));
    }
    last_round_ = m.round_id;
    peer_bytes() += encode(m);
    peer_bytes() += '\n';
  }

  Message receive() override {
    std::string& bytes = side_ == Sender::kAlice ? state_->to_alice : state_->to_bob;
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) {
      if (peer_closed() && bytes.empty()) {
        return Message{0, side_ == Sender::kAlice ? Sender::kBob : Sender::kAlice,
                       Kind::kSessionEnd, {}};
      }
      throw TransportError("receive on empty channel");
    }
    const std::string line = bytes.substr(0, nl);
    bytes.erase(0, nl + 1);
    return decode(line);
  }

  void close() override {
    (side_ == Sender::kAlice ? state_->alice_closed : state_->bob_closed) = true;
  }

 private:
  bool closed() const {
    return side_ == Sender::kAlice ? state_->alice_closed : state_->bob_closed;
  }
  bool peer_closed() const {
    return side_ == Sender::kAlice ? state_->bob_closed : state_->alice_closed;
  }
  std::string& peer_bytes() {
    return side_ == Sender::kAlice ? state_->to_bob : state_->to_alice;
  }

  std::shared_ptr<StreamState> state_;
  Sender side_;
  long last_round_ = 0;
};

}  // namespace

Pair inproc_pair() {
  auto state = std::make_shared<InprocState>();
  Pair pair;
  pair.alice = std::make_unique<InprocEndpoint>(state, Sender::kAlice);
  pair.bob = std::make_unique<InprocEndpoint>(state, Sender::kBob);
  return pair;
}

Pair stream_loopback_pair() {
  auto state = std::make_shared<StreamState>();
  Pair pair;
  pair.alice = std::make_unique<StreamEndpoint>(state, Sender::kAlice);
  pair.bob = std::make_unique<StreamEndpoint>(state, Sender::kBob);
  return pair;
}

}  // namespace qkd::transport
