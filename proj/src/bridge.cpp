#include "mbrlab/bridge.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>
#include <utility>

#include "json.hpp"

#include "mbrlab/error.hpp"

namespace mbrlab {

using nlohmann::json;

// Child process with its stdin/stdout attached to pipes.
class ScorerProcess {
 public:
  explicit ScorerProcess(const std::string& command) {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw ProtocolError("pipe() failed: " + std::string(std::strerror(errno)), "launch");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw ProtocolError("pipe() failed: " + std::string(std::strerror(errno)), "launch");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw ProtocolError("fork() failed: " + std::string(std::strerror(errno)), "launch");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
    write_fd_ = to_child[1];
    read_ = ::fdopen(from_child[0], "r");
  }

  ~ScorerProcess() { shutdown(std::nullopt); }

  ScorerProcess(const ScorerProcess&) = delete;
  ScorerProcess& operator=(const ScorerProcess&) = delete;

  // False if the child is gone.
  bool write_line(const std::string& line) {
    if (write_fd_ < 0) return false;
    std::string buf = line;
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      const auto n = ::write(write_fd_, buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  // std::nullopt on EOF.
  std::optional<std::string> read_line() {
    if (!read_) return std::nullopt;
    char* buf = nullptr;
    std::size_t cap = 0;
    const auto n = ::getline(&buf, &cap, read_);
    std::optional<std::string> line;
    // a final line without '\n' means the child died while writing
    if (n > 0 && buf[n - 1] == '\n') line.emplace(buf, static_cast<std::size_t>(n - 1));
    std::free(buf);
    return line;
  }

  void shutdown(const std::optional<std::string>& farewell) {
    if (farewell && write_fd_ >= 0) write_line(*farewell);
    if (write_fd_ >= 0) {
      ::close(write_fd_);
      write_fd_ = -1;
    }
    if (read_) {
      std::fclose(read_);
      read_ = nullptr;
    }
    if (pid_ > 0) {
      int status = 0;
      while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
      }
      pid_ = -1;
    }
  }

 private:
  pid_t pid_ = -1;
  int write_fd_ = -1;
  std::FILE* read_ = nullptr;
};

namespace {

void ignore_sigpipe() {
  static const bool once = [] {
    struct sigaction sa {};
    sa.sa_handler = SIG_IGN;
    ::sigaction(SIGPIPE, &sa, nullptr);
    return true;
  }();
  (void)once;
}

// Thrown internally when the scorer disappears mid-exchange.
struct ScorerDied {};

std::string abbreviate(const std::string& s) { return s.size() <= 120 ? s : s.substr(0, 120) + "..."; }

}  // namespace

BridgeClient::BridgeClient(std::string command, BridgeOptions options)
    : command_(std::move(command)), options_(options) {
  if (options_.batch_size == 0) options_.batch_size = 1;
  ignore_sigpipe();
  start();
}

BridgeClient::~BridgeClient() {
  try {
    close();
  } catch (...) {
  }
}

void BridgeClient::start() {
  process_ = std::make_unique<ScorerProcess>(command_);
  const json hello = {{"op", "hello"}, {"proto", kBridgeProtocolVersion}};
  if (!process_->write_line(hello.dump())) throw ProtocolError("scorer '" + command_ + "' closed its input before handshake", "handshake");
  const auto reply = process_->read_line();
  if (!reply) throw ProtocolError("scorer '" + command_ + "' exited before answering hello", "handshake");
  json msg;
  try {
    msg = json::parse(*reply);
  } catch (const json::exception&) {
    throw ProtocolError("handshake reply is not JSON: " + abbreviate(*reply), "handshake");
  }
  if (!msg.is_object() || msg.value("op", "") != "hello" || !msg.contains("proto") ||
      msg["proto"] != kBridgeProtocolVersion || !msg.contains("name") || !msg["name"].is_string()) {
    throw ProtocolError("unexpected handshake reply: " + abbreviate(*reply), "handshake");
  }
  name_ = msg["name"].get<std::string>();
}

void BridgeClient::close() {
  if (!process_) return;
  process_->shutdown(json{{"op", "bye"}}.dump());
  process_.reset();
}

std::vector<double> BridgeClient::score_batch(std::span<const BridgeItem> batch) {
  const std::uint64_t id = next_id_++;
  json request = {{"op", "score"}, {"id", id}, {"items", json::array()}};
  auto& items = request["items"];
  for (const auto& item : batch) {
    items.push_back({{"i", item.i}, {"j", item.j}, {"hyp", item.hyp}, {"ref", item.ref}, {"src", item.src}});
  }
  // invalid UTF-8 in texts would make dump() throw; the readers reject it earlier
  if (!process_->write_line(request.dump())) throw ScorerDied{};
  const auto reply = process_->read_line();
  if (!reply) throw ScorerDied{};

  json msg;
  try {
    msg = json::parse(*reply);
  } catch (const json::exception&) {
    throw ProtocolError("score reply is not JSON: " + abbreviate(*reply));
  }
  if (!msg.is_object()) throw ProtocolError("score reply is not an object: " + abbreviate(*reply));
  const std::string op = msg.value("op", "");
  if (op == "error") {
    throw ProtocolError("scorer reported an error for request " + std::to_string(id) + ": " +
                        (msg.contains("msg") ? msg["msg"].dump() : std::string("(no message)")));
  }
  if (op != "score" || !msg.contains("id") || !msg["id"].is_number_integer() || msg["id"].get<std::uint64_t>() != id) {
    throw ProtocolError("reply does not answer score request " + std::to_string(id) + ": " + abbreviate(*reply));
  }
  if (!msg.contains("scores") || !msg["scores"].is_array()) throw ProtocolError("score reply without a scores array");
  const auto& scores = msg["scores"];
  if (scores.size() != batch.size()) {
    throw ProtocolError("score count mismatch in request " + std::to_string(id) + ": expected " +
                            std::to_string(batch.size()) + ", got " + std::to_string(scores.size()),
                        "count");
  }

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> slot;
  for (std::size_t k = 0; k < batch.size(); ++k) slot.emplace(std::make_pair(batch[k].i, batch[k].j), k);
  std::vector<double> out(batch.size(), 0.0);
  std::vector<bool> seen(batch.size(), false);
  for (const auto& s : scores) {
    if (!s.is_object() || !s.contains("i") || !s.contains("j") || !s.contains("s") || !s["i"].is_number_integer() ||
        !s["j"].is_number_integer() || !s["s"].is_number()) {
      throw ProtocolError("malformed score entry: " + abbreviate(s.dump()));
    }
    const auto key = std::make_pair(s["i"].get<std::uint32_t>(), s["j"].get<std::uint32_t>());
    const auto it = slot.find(key);
    if (it == slot.end()) {
      throw ProtocolError("score for unrequested cell (" + std::to_string(key.first) + ", " +
                          std::to_string(key.second) + ")");
    }
    if (seen[it->second]) {
      throw ProtocolError("duplicate score for cell (" + std::to_string(key.first) + ", " +
                          std::to_string(key.second) + ")");
    }
    const double v = s["s"].get<double>();
    if (!std::isfinite(v)) throw ProtocolError("non-finite score from scorer");
    seen[it->second] = true;
    out[it->second] = v;
  }
  return out;
}

std::vector<double> BridgeClient::score(std::span<const BridgeItem> items) {
  if (!process_) throw ProtocolError("bridge client is closed");
  std::vector<double> out;
  out.reserve(items.size());
  for (std::size_t begin = 0; begin < items.size(); begin += options_.batch_size) {
    const auto batch = items.subspan(begin, std::min(options_.batch_size, items.size() - begin));
    for (int attempt = 0;; ++attempt) {
      try {
        const auto scores = score_batch(batch);
        out.insert(out.end(), scores.begin(), scores.end());
        break;
      } catch (const ScorerDied&) {
        // partial results of the dead scorer are dropped with it
        process_->shutdown(std::nullopt);
        if (attempt >= options_.crash_retries) {
          throw ProtocolError("scorer '" + command_ + "' died mid-batch " + std::to_string(attempt + 1) +
                                  " time(s); giving up",
                              "crash");
        }
        ++restarts_;
        start();
      }
    }
  }
  return out;
}

UtilityMatrix bridge_build_matrix(BridgeClient& client, std::span<const Candidate> pool,
                                  std::span<const Candidate> erefs, std::string_view source) {
  if (pool.empty() || erefs.empty()) throw Error("dimension", "bridge_build_matrix: empty candidate list");
  UtilityMatrix m(pool.size(), erefs.size());
  for (std::size_t j = 0; j < erefs.size(); ++j) m.eref_weights[j] = erefs[j].count;
  std::vector<BridgeItem> items;
  items.reserve(pool.size() * erefs.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = 0; j < erefs.size(); ++j) {
      items.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), pool[i].text, erefs[j].text,
                       std::string(source)});
    }
  }
  const auto scores = client.score(items);
  for (std::size_t k = 0; k < items.size(); ++k) m.at(items[k].i, items[k].j) = scores[k];
  return m;
}

UtilityMatrix bridge_build_matrix(std::span<const Candidate> pool, std::span<const Candidate> erefs,
                                  const UtilitySpec& spec, std::string_view source) {
  if (spec.kind != UtilityKind::kExternalBridge) throw Error("config", "bridge_build_matrix requires a bridge utility");
  spec.validate();
  BridgeClient client(spec.params.at("command"));
  auto m = bridge_build_matrix(client, pool, erefs, source);
  client.close();
  return m;
}

std::vector<double> bridge_quality_estimates(BridgeClient& client, std::span<const Candidate> pool,
                                             std::string_view source) {
  std::vector<BridgeItem> items;
  items.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    items.push_back({static_cast<std::uint32_t>(i), 0, pool[i].text, std::string(), std::string(source)});
  }
  return client.score(items);
}

}  // namespace mbrlab
