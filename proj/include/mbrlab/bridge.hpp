#pragma once

// Client side of the external scorer protocol. The scorer is a child process
// speaking line-delimited JSON over stdin/stdout:
//
//   -> {"op":"hello","proto":1}
//   <- {"op":"hello","name":"...","proto":1}
//   -> {"op":"score","id":7,"items":[{"i":0,"j":3,"hyp":"..","ref":"..","src":".."}, ...]}
//   <- {"op":"score","id":7,"scores":[{"i":0,"j":3,"s":71.5}, ...]}
//   -> {"op":"bye"}
//
// Responses are matched to requests by id and to cells by (i, j), never by
// position.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbrlab/utility.hpp"

namespace mbrlab {

inline constexpr int kBridgeProtocolVersion = 1;

struct BridgeItem {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::string hyp;
  std::string ref;
  std::string src;
};

struct BridgeOptions {
  std::size_t batch_size = 256;
  // Restarts of the scorer allowed per batch after it dies mid-batch.
  int crash_retries = 1;
};

class ScorerProcess;

class BridgeClient {
 public:
  explicit BridgeClient(std::string command, BridgeOptions options = {});
  ~BridgeClient();

  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  // Name announced in the handshake.
  const std::string& scorer_name() const noexcept { return name_; }
  const std::string& command() const noexcept { return command_; }

  // One score per item, in item order. Throws ProtocolError.
  std::vector<double> score(std::span<const BridgeItem> items);

  // Sends bye and waits for the child. Idempotent.
  void close();

  std::uint64_t requests_sent() const noexcept { return next_id_; }
  int restarts() const noexcept { return restarts_; }

 private:
  void start();
  std::vector<double> score_batch(std::span<const BridgeItem> batch);

  std::string command_;
  BridgeOptions options_;
  std::unique_ptr<ScorerProcess> process_;
  std::string name_;
  std::uint64_t next_id_ = 0;
  int restarts_ = 0;
};

// Fills a pool x pseudo-reference matrix through the scorer. The source
// sentence travels with every pair.
UtilityMatrix bridge_build_matrix(BridgeClient& client, std::span<const Candidate> pool,
                                  std::span<const Candidate> erefs, std::string_view source);

// Launches a scorer from spec.params["command"] for a single call.
UtilityMatrix bridge_build_matrix(std::span<const Candidate> pool, std::span<const Candidate> erefs,
                                  const UtilitySpec& spec, std::string_view source);

// Reference-free scores: one item per candidate with j = 0 and an empty ref.
std::vector<double> bridge_quality_estimates(BridgeClient& client, std::span<const Candidate> pool,
                                             std::string_view source);

}  // namespace mbrlab
