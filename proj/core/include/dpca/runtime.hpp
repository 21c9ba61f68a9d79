#pragma once

#include <atomic>
#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpca/eigensolver.hpp"
#include "dpca/estimation.hpp"
#include "dpca/graph.hpp"

namespace dpca {

namespace detail {
class Protocol;
}
class Network;
Network spawn_cliques(const DecomposableGraph& graph, const SampleSet& data);
Network spawn_cliques(const BlockSparseConcentration& K);

/// Counts attempts by nodes to touch indices outside their own clique.
class LocalityMonitor {
 public:
  void record_violation() noexcept { ++violations_; }
  long violations() const noexcept { return violations_.load(); }

 private:
  std::atomic<long> violations_{0};
};

/// One logical participant. It holds the columns of the data restricted to its
/// clique and, after assembly, its block of K. Every translation from a global
/// index to local storage goes through local_index(), which reports and
/// rejects indices outside the clique.
class CliqueNode {
 public:
  CliqueNode(int index, IndexSet clique, std::shared_ptr<LocalityMonitor> monitor);

  int index() const noexcept { return index_; }
  const IndexSet& clique() const noexcept { return clique_; }
  int width() const noexcept { return static_cast<int>(clique_.size()); }

  /// Position of a global index in the clique. Throws LocalityViolation.
  int local_index(NodeId global) const;
  std::vector<int> local_positions(std::span<const NodeId> globals) const;

  /// n x |C_k| samples, columns in clique order (empty if spawned from K).
  const Matrix& samples() const noexcept { return samples_; }
  /// K restricted to C_k (empty before assembly).
  const Matrix& block() const noexcept { return block_; }
  bool assembled() const noexcept { return block_.size() > 0; }

 private:
  friend class detail::Protocol;
  friend Network spawn_cliques(const DecomposableGraph& graph, const SampleSet& data);
  friend Network spawn_cliques(const BlockSparseConcentration& K);

  int index_;
  IndexSet clique_;
  std::shared_ptr<LocalityMonitor> monitor_;
  Matrix samples_;
  Matrix block_;
  Matrix basis_;  // rows of the deflation vectors on C_k
};

/// A message in flight. Payloads are exact copies of dense matrices.
struct Envelope {
  int source = 0;
  int destination = 0;
  std::string phase;
  int dim = 0;
  std::vector<Matrix> payload;
};

/// Transport between nodes. A socket-backed implementation could replace the
/// in-process one without touching the protocol.
class Mailbox {
 public:
  virtual ~Mailbox() = default;
  virtual void send(Envelope envelope) = 0;
  /// Oldest pending envelope for `node`, if any.
  virtual std::optional<Envelope> receive(int node) = 0;
  /// Drops undelivered envelopes (after an early verdict).
  virtual void discard() = 0;
  /// Every envelope sent so far, in send order.
  virtual const std::vector<MessageRecord>& log() const = 0;
};

class InProcessMailbox final : public Mailbox {
 public:
  explicit InProcessMailbox(int nodes) : queues_(nodes) {}

  void send(Envelope envelope) override;
  std::optional<Envelope> receive(int node) override;
  void discard() override;
  const std::vector<MessageRecord>& log() const override { return log_; }

 private:
  std::mutex mutex_;
  std::vector<std::deque<Envelope>> queues_;
  std::vector<MessageRecord> log_;
};

class Network {
 public:
  const DecomposableGraph& graph() const noexcept { return graph_; }
  const std::vector<CliqueNode>& nodes() const noexcept { return nodes_; }
  const CliqueNode& node(int k) const { return nodes_.at(k); }
  long locality_violations() const noexcept { return monitor_->violations(); }
  bool assembled() const;

 private:
  friend Network spawn_cliques(const DecomposableGraph& graph, const SampleSet& data);
  friend Network spawn_cliques(const BlockSparseConcentration& K);
  friend class detail::Protocol;

  explicit Network(DecomposableGraph graph);

  DecomposableGraph graph_;
  std::shared_ptr<LocalityMonitor> monitor_;
  std::vector<CliqueNode> nodes_;
};

/// One node per clique, each holding only its C_k columns of the data.
/// Throws DimensionMismatch.
Network spawn_cliques(const DecomposableGraph& graph, const SampleSet& data);
/// One node per clique holding its block of an already assembled K.
Network spawn_cliques(const BlockSparseConcentration& K);

struct ProtocolRequest {
  enum class Kind { Assemble, MinEig, Eigvec, Spectrum };

  Kind kind = Kind::Assemble;
  double eps = 1e-8;               // bisection tolerance
  std::optional<Bracket> bracket;  // min_eig; default [0, distributed upper bound]
  double lambda = 0.0;             // eigvec
  double lambda_tol = 0.0;         // eigvec
  int components = 1;              // spectrum
  DeflationSet deflation;          // min_eig and eigvec

  static ProtocolRequest assemble() { return {}; }
  static ProtocolRequest min_eig(double eps, std::optional<Bracket> bracket = std::nullopt);
  static ProtocolRequest eigvec(double lambda, double lambda_tol = 0.0);
  static ProtocolRequest spectrum(int components, double eps);
};

struct ProtocolResult {
  std::optional<BlockSparseConcentration> concentration;  // assemble
  std::optional<BisectionResult> bisection;               // min_eig
  Vector vector;                                          // eigvec
  std::vector<EigenPair> pairs;                           // spectrum
  std::vector<MessageRecord> log;
  long locality_violations = 0;
};

/// Executes the request over the nodes. Assembly requires a network spawned
/// from data; the eigen requests require an assembled network (assembling
/// first if needed). Results equal the centralized operations bit for bit.
ProtocolResult run_protocol(Network& network, const ProtocolRequest& request);

struct MessageStats {
  std::size_t count = 0;
  int max_dim = 0;
  long total_dim = 0;
  std::size_t total_bytes = 0;
  int centralized_dim = 0;  // p: what a single fusion center would handle
  std::map<std::string, std::size_t> by_phase;
};

MessageStats message_stats(std::span<const MessageRecord> log, int p = 0);

}  // namespace dpca
