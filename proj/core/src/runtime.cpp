#include "dpca/runtime.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "dpca/error.hpp"
#include "dpca/parallel.hpp"
#include "solver_core.hpp"
#include "sweep_kernel.hpp"

namespace dpca {

CliqueNode::CliqueNode(int index, IndexSet clique, std::shared_ptr<LocalityMonitor> monitor)
    : index_(index), clique_(std::move(clique)), monitor_(std::move(monitor)) {}

int CliqueNode::local_index(NodeId global) const {
  const auto it = std::lower_bound(clique_.begin(), clique_.end(), global);
  if (it == clique_.end() || *it != global) {
    monitor_->record_violation();
    std::ostringstream os;
    os << "node " << index_ << " accessed index " << global << " outside its clique";
    throw Error(ErrorCode::LocalityViolation, os.str());
  }
  return static_cast<int>(it - clique_.begin());
}

std::vector<int> CliqueNode::local_positions(std::span<const NodeId> globals) const {
  std::vector<int> pos;
  pos.reserve(globals.size());
  for (NodeId g : globals) pos.push_back(local_index(g));
  return pos;
}

void InProcessMailbox::send(Envelope envelope) {
  std::lock_guard lock(mutex_);
  std::size_t doubles = 0;
  for (const auto& m : envelope.payload) doubles += static_cast<std::size_t>(m.size());
  log_.push_back({envelope.source, envelope.destination, envelope.dim, envelope.phase,
                  doubles * sizeof(double)});
  queues_.at(envelope.destination).push_back(std::move(envelope));
}

std::optional<Envelope> InProcessMailbox::receive(int node) {
  std::lock_guard lock(mutex_);
  auto& q = queues_.at(node);
  if (q.empty()) return std::nullopt;
  Envelope e = std::move(q.front());
  q.pop_front();
  return e;
}

void InProcessMailbox::discard() {
  std::lock_guard lock(mutex_);
  for (auto& q : queues_) q.clear();
}

Network::Network(DecomposableGraph graph)
    : graph_(std::move(graph)), monitor_(std::make_shared<LocalityMonitor>()) {
  for (int k = 0; k < graph_.clique_count(); ++k) nodes_.emplace_back(k, graph_.clique(k), monitor_);
}

bool Network::assembled() const {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const CliqueNode& n) { return n.assembled(); });
}

Network spawn_cliques(const DecomposableGraph& graph, const SampleSet& data) {
  if (data.p() != graph.p()) {
    throw Error(ErrorCode::DimensionMismatch, "data has " + std::to_string(data.p()) +
                                                  " columns but the graph has p = " + std::to_string(graph.p()));
  }
  Network net(graph);
  for (auto& node : net.nodes_) {
    const std::vector<int> cols(node.clique().begin(), node.clique().end());
    node.samples_ = data.samples(Eigen::all, cols);
  }
  return net;
}

Network spawn_cliques(const BlockSparseConcentration& K) {
  Network net(K.graph());
  for (auto& node : net.nodes_) node.block_ = K.block(node.clique());
  return net;
}

ProtocolRequest ProtocolRequest::min_eig(double eps, std::optional<Bracket> bracket) {
  ProtocolRequest r;
  r.kind = Kind::MinEig;
  r.eps = eps;
  r.bracket = bracket;
  return r;
}

ProtocolRequest ProtocolRequest::eigvec(double lambda, double lambda_tol) {
  ProtocolRequest r;
  r.kind = Kind::Eigvec;
  r.lambda = lambda;
  r.lambda_tol = lambda_tol;
  return r;
}

ProtocolRequest ProtocolRequest::spectrum(int components, double eps) {
  ProtocolRequest r;
  r.kind = Kind::Spectrum;
  r.components = components;
  r.eps = eps;
  return r;
}

namespace detail {

/// Drives the nodes through the same kernel steps, in the same order, as the
/// centralized solver. Node k only ever touches nodes_[k] state, its own
/// plan and what arrives in its inbox; the loops below play the role of the
/// sequencer that orders the nodes' turns.
class Protocol {
 public:
  explicit Protocol(Network& net)
      : net_(net),
        g_(net.graph_),
        K_(g_.clique_count()),
        plan_(make_plan(g_)),
        mail_(K_),
        work_(K_),
        steps_(K_),
        used_history_(K_, 0),
        data_(K_) {}

  const std::vector<MessageRecord>& log() const { return mail_.log(); }

  BlockSparseConcentration assemble();

  void load_deflation(const DeflationSet& defl);
  void set_weights(int rank, double w) { weights_ = Vector::Constant(rank, w); }
  void push_component(const NormalizedVector& found);

  double deflation_weight();
  double upper_bound();
  FeasibilityVerdict check(double t);
  BisectionResult bisect(Bracket bracket);
  RefinedVector null_vector(double lambda, double lambda_tol, double lo, double hi);

 private:
  CliqueNode& node(int k) { return net_.nodes_[k]; }
  const NodeData& data(int k) const { return data_[k]; }
  void refresh(int k) { data_[k] = {node(k).block_, node(k).basis_}; }
  void send(int from, int to, std::string phase, int dim, std::vector<Matrix> payload) {
    mail_.send({from, to, std::move(phase), dim, std::move(payload)});
  }
  /// Absorbs queued sweep payloads at node k and returns the Dbar handed to it.
  Matrix drain_sweeps(int k);
  std::optional<NormalizedVector> null_attempt(double lambda, double lambda_tol, double scale);

  Network& net_;
  const DecomposableGraph& g_;
  int K_;
  std::vector<CliquePlan> plan_;
  InProcessMailbox mail_;
  std::vector<NodeWork> work_;
  std::vector<StepResult> steps_;
  // History width each node reads during back-substitution, announced with
  // its upward message as a control scalar.
  std::vector<Eigen::Index> used_history_;
  std::vector<NodeData> data_;
  Vector weights_;  // deflation weights, known to every node
};

BlockSparseConcentration Protocol::assemble() {
  for (const auto& n : net_.nodes_) {
    if (n.samples_.rows() == 0) {
      throw Error(ErrorCode::InvalidArgument, "assembly needs a network spawned from samples");
    }
  }
  std::vector<Matrix> agg(K_);
  parallel_for(K_, [&](std::size_t k) {
    const auto le = estimate_clique(g_, static_cast<int>(k), node(static_cast<int>(k)).samples_);
    agg[k] = assembly::contribution(g_, le);
  });
  for (int k = K_ - 1; k >= 0; --k) {
    while (auto e = mail_.receive(k)) {
      const auto pos = node(k).local_positions(g_.separator(e->source));
      assembly::accumulate(agg[k], pos, e->payload.at(0));
    }
    if (k == 0) break;
    const auto own = node(k).local_positions(g_.separator(k));
    const int s = static_cast<int>(own.size());
    send(k, plan_[k].parent, "assemble-up", s, {assembly::extract(agg[k], own)});
  }
  for (int k = 1; k < K_; ++k) {
    const int par = plan_[k].parent;
    const auto at_parent = node(par).local_positions(g_.separator(k));
    send(par, k, "assemble-down", static_cast<int>(at_parent.size()),
         {assembly::extract(agg[par], at_parent)});
    auto e = mail_.receive(k);
    const auto own = node(k).local_positions(g_.separator(k));
    assembly::overwrite(agg[k], own, e->payload.at(0));
  }
  BlockSparseConcentration Kmat(g_);
  for (int k = 0; k < K_; ++k) {
    node(k).block_ = agg[k];
    Kmat.set_block(g_.clique(k), agg[k]);
  }
  return Kmat;
}

void Protocol::load_deflation(const DeflationSet& defl) {
  if (defl.rank() > 0 && defl.vectors.rows() != g_.p()) {
    throw Error(ErrorCode::DimensionMismatch, "deflation vectors do not match the dimension of K");
  }
  weights_ = defl.weights;
  for (auto& n : net_.nodes_) {
    const std::vector<int> rows(n.clique().begin(), n.clique().end());
    n.basis_ = defl.rank() > 0 ? Matrix(defl.vectors(rows, Eigen::all))
                               : Matrix(static_cast<Eigen::Index>(rows.size()), 0);
    refresh(n.index());
  }
}

void Protocol::push_component(const NormalizedVector& found) {
  for (int k = 0; k < K_; ++k) {
    Vector mine = found.local[k];
    mine /= found.norm;
    if (found.flipped) mine = -mine;
    auto& b = node(k).basis_;
    b.conservativeResize(Eigen::NoChange, b.cols() + 1);
    b.col(b.cols() - 1) = mine;
    refresh(k);
  }
}

double Protocol::deflation_weight() {
  for (int k = K_ - 1; k >= 0; --k) {
    double v = node(k).block_.cwiseAbs().rowwise().sum().maxCoeff();
    while (auto e = mail_.receive(k)) v = std::max(v, e->payload.at(0)(0, 0));
    if (k == 0) return 2.0 * K_ * v + 1.0;
    send(k, plan_[k].parent, "bound", 1, {Matrix::Constant(1, 1, v)});
  }
  return 0.0;
}

double Protocol::upper_bound() {
  const Matrix dbar0 = weights_.size() > 0 ? Matrix(weights_.asDiagonal()) : Matrix(0, 0);
  for (int k = K_ - 1; k >= 0; --k) {
    const NodeData& d = data(k);
    NodeWork w = fresh_work(d);
    const Matrix a = clique_matrix(d, w, dbar0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    double v = eig.eigenvalues()(0);
    while (auto e = mail_.receive(k)) v = std::min(v, e->payload.at(0)(0, 0));
    if (k == 0) return v;
    send(k, plan_[k].parent, "bound", 1, {Matrix::Constant(1, 1, v)});
  }
  return 0.0;
}

Matrix Protocol::drain_sweeps(int k) {
  Matrix dbar;
  bool have_dbar = k == K_ - 1;
  if (have_dbar) dbar = weights_.size() > 0 ? Matrix(weights_.asDiagonal()) : Matrix(0, 0);
  while (auto e = mail_.receive(k)) {
    if (e->phase == "sweep") {
      UpdatePayload p;
      p.source = e->source;
      p.indices = g_.separator(e->source);
      p.corr = std::move(e->payload.at(0));
      p.rows = std::move(e->payload.at(1));
      absorb(work_[k], node(k).local_positions(p.indices), p);
    }
    if (e->source == k + 1 && e->payload.size() == (e->phase == "sweep" ? 3u : 1u)) {
      dbar = std::move(e->payload.back());
      have_dbar = true;
    }
  }
  if (!have_dbar) throw Error(ErrorCode::InvalidArgument, "protocol order violated: missing Dbar");
  return dbar;
}

FeasibilityVerdict Protocol::check(double t) {
  FeasibilityVerdict v;
  mail_.discard();
  for (int k = 0; k < K_; ++k) work_[k] = fresh_work(data(k));
  for (int k = K_ - 1; k >= 1; --k) {
    const Matrix dbar = drain_sweeps(k);
    auto step = eliminate(data(k), work_[k], plan_[k], t, dbar, StepMode::Feasibility, 1.0);
    if (!step.passed) {
      v.failing_clique = k;
      mail_.discard();
      return v;
    }
    const int par = plan_[k].parent;
    const int dim = step.payload.message_dim;
    if (par == k - 1) {
      send(k, par, "sweep", dim, {step.payload.corr, step.payload.rows, step.next_dbar});
    } else {
      send(k, par, "sweep", dim, {step.payload.corr, step.payload.rows});
      send(k, k - 1, "token", static_cast<int>(step.next_dbar.rows()), {step.next_dbar});
    }
  }
  const Matrix dbar = drain_sweeps(0);
  const Matrix a = clique_matrix(data(0), work_[0], dbar);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  v.feasible = t < eig.eigenvalues()(0);
  if (!v.feasible) v.failing_clique = 0;
  return v;
}

BisectionResult Protocol::bisect(Bracket bracket) {
  const std::size_t first = mail_.log().size();
  auto res = bisect_generic([&](double t) { return check(t); }, bracket);
  res.messages.assign(mail_.log().begin() + static_cast<std::ptrdiff_t>(first), mail_.log().end());
  return res;
}

std::optional<NormalizedVector> Protocol::null_attempt(double lambda, double lambda_tol,
                                                       double scale) {
  mail_.discard();
  for (int k = 0; k < K_; ++k) {
    work_[k] = fresh_work(data(k));
    steps_[k] = StepResult{};
  }
  int terminal = 0;
  Matrix root_dbar;
  for (int k = K_ - 1; k >= 1; --k) {
    const Matrix dbar = drain_sweeps(k);
    steps_[k] = eliminate(data(k), work_[k], plan_[k], lambda, dbar, StepMode::NullSpace, scale,
                        lambda_tol);
    if (!steps_[k].passed) {
      terminal = k;
      break;
    }
    const auto& st = steps_[k];
    used_history_[k] = st.folded ? st.next_dbar.rows() : st.dbar.rows();
    const int par = plan_[k].parent;
    if (par == k - 1) {
      send(k, par, "sweep", st.payload.message_dim, {st.payload.corr, st.payload.rows, st.next_dbar});
    } else {
      send(k, par, "sweep", st.payload.message_dim, {st.payload.corr, st.payload.rows});
      send(k, k - 1, "token", static_cast<int>(st.next_dbar.rows()), {st.next_dbar});
    }
  }
  if (terminal == 0) root_dbar = drain_sweeps(0);
  mail_.discard();

  std::vector<Vector> uc(K_);
  for (int k = 0; k < K_; ++k) uc[k] = Vector::Zero(node(k).width());
  const TerminalSolution term = terminal == 0 ? solve_root(data(0), work_[0], root_dbar, lambda, scale)
                                              : solve_singular(steps_[terminal]);
  const auto& tpos = plan_[terminal].res_pos;
  for (std::size_t a = 0; a < tpos.size(); ++a) uc[terminal](tpos[a]) = term.local(a);
  Vector z = term.z;

  for (int m = terminal + 1; m < K_; ++m) {
    const int par = plan_[m].parent;
    const auto at_parent = node(par).local_positions(g_.separator(m));
    Vector u_s(at_parent.size());
    for (std::size_t a = 0; a < at_parent.size(); ++a) u_s(a) = uc[par](at_parent[a]);
    const int s = static_cast<int>(u_s.size());
    // Without a fold the leading entries of z repeat u_S.
    z = Vector(z.tail(used_history_[m]));
    if (par == m - 1) {
      send(par, m, "backsub", s + static_cast<int>(z.size()), {u_s, z});
    } else {
      send(par, m, "backsub", s, {u_s});
      send(m - 1, m, "token", static_cast<int>(z.size()), {z});
    }
    Vector zin;
    while (auto e = mail_.receive(m)) {
      if (e->phase == "backsub") u_s = e->payload.at(0);
      if (e->source == m - 1) zin = e->payload.back();
    }
    const Vector u_r = back_substitute(steps_[m], u_s, zin);
    z = zin;
    const auto own_s = node(m).local_positions(g_.separator(m));
    for (std::size_t a = 0; a < own_s.size(); ++a) uc[m](own_s[a]) = u_s(a);
    const auto& rp = plan_[m].res_pos;
    for (std::size_t a = 0; a < rp.size(); ++a) uc[m](rp[a]) = u_r(a);
  }

  // Result collection: every node reports the entries it introduced.
  Vector u = Vector::Zero(g_.p());
  for (int k = 0; k < K_; ++k) {
    const auto& rp = plan_[k].res_pos;
    for (std::size_t a = 0; a < rp.size(); ++a) u(plan_[k].residual[a]) = uc[k](rp[a]);
  }
  auto out = finalize_null_vector(std::move(u), terminal == 0, term.sigma, term.tau);
  if (out) out->local = std::move(uc);
  return out;
}

RefinedVector Protocol::null_vector(double lambda, double lambda_tol, double lo, double hi) {
  return find_null_vector(lambda, lambda_tol, lo, hi, [&](double l, double scale) {
    return null_attempt(l, lambda_tol, scale);
  });
}

}  // namespace detail

ProtocolResult run_protocol(Network& network, const ProtocolRequest& request) {
  using Kind = ProtocolRequest::Kind;
  detail::Protocol proto(network);
  ProtocolResult out;
  if (request.kind == Kind::Assemble) {
    out.concentration = proto.assemble();
  } else {
    if (!network.assembled()) proto.assemble();
    switch (request.kind) {
      case Kind::MinEig: {
        proto.load_deflation(request.deflation);
        Bracket b;
        if (request.bracket) {
          b = *request.bracket;
        } else {
          b = {0.0, proto.upper_bound(), request.eps};
        }
        out.bisection = proto.bisect(b);
        break;
      }
      case Kind::Eigvec:
        proto.load_deflation(request.deflation);
        out.vector = proto
                         .null_vector(request.lambda, request.lambda_tol,
                                      request.lambda - request.lambda_tol,
                                      request.lambda + request.lambda_tol)
                         .vec.u;
        break;
      case Kind::Spectrum: {
        const int p = network.graph().p();
        if (request.components < 1 || request.components > p) {
          throw Error(ErrorCode::InvalidArgument, "component count must lie in [1, p]");
        }
        proto.load_deflation(DeflationSet::none(p));
        const double w = proto.deflation_weight();
        for (int j = 0; j < request.components; ++j) {
          proto.set_weights(j, w);
          const auto res = proto.bisect({0.0, proto.upper_bound(), request.eps});
          EigenPair pair;
          pair.bracket_width = res.width();
          pair.iterations = res.iterations;
          auto found = detail::eigenpair_vector(
              res, request.eps, [&](Bracket b) { return proto.bisect(b); },
              [&](double l, double tol, double lo, double hi) {
                return proto.null_vector(l, tol, lo, hi);
              });
          proto.push_component(found.vec);
          pair.value = found.lambda;
          pair.vector = std::move(found.vec.u);
          out.pairs.push_back(std::move(pair));
        }
        break;
      }
      case Kind::Assemble:
        break;
    }
  }
  out.log = proto.log();
  out.locality_violations = network.locality_violations();
  return out;
}

MessageStats message_stats(std::span<const MessageRecord> log, int p) {
  MessageStats st;
  st.centralized_dim = p;
  for (const auto& m : log) {
    ++st.count;
    st.max_dim = std::max(st.max_dim, m.dim);
    st.total_dim += m.dim;
    st.total_bytes += m.bytes;
    ++st.by_phase[m.phase];
  }
  return st;
}

}  // namespace dpca
