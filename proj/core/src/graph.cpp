#include "dpca/graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dpca/error.hpp"
#include "dpca/rng.hpp"

namespace dpca {

namespace {

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

bool is_subset(std::span<const NodeId> a, std::span<const NodeId> b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<int> positions_in(std::span<const NodeId> superset, std::span<const NodeId> subset) {
  std::vector<int> pos;
  pos.reserve(subset.size());
  auto it = superset.begin();
  for (NodeId v : subset) {
    it = std::lower_bound(it, superset.end(), v);
    if (it == superset.end() || *it != v) {
      throw Error(ErrorCode::InvalidArgument,
                  "index " + std::to_string(v) + " is not in the enclosing set");
    }
    pos.push_back(static_cast<int>(it - superset.begin()));
  }
  return pos;
}

CliqueSequence derive_sets(int /*p*/, std::span<const IndexSet> cliques) {
  CliqueSequence seq;
  const auto K = cliques.size();
  seq.history.resize(K);
  seq.separator.resize(K);
  seq.residual.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (k == 0) {
      seq.history[0] = cliques[0];
      continue;
    }
    seq.separator[k] = set_intersection(seq.history[k - 1], cliques[k]);
    seq.history[k] = set_union(seq.history[k - 1], cliques[k]);
    seq.residual[k] = set_difference(cliques[k], seq.separator[k]);
  }
  return seq;
}

DecomposableGraph DecomposableGraph::build(int p, std::vector<IndexSet> cliques) {
  if (p <= 0) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  if (cliques.empty()) throw Error(ErrorCode::InvalidArgument, "graph has no cliques");

  for (std::size_t k = 0; k < cliques.size(); ++k) {
    auto& c = cliques[k];
    if (c.empty()) {
      throw Error(ErrorCode::InvalidArgument, "clique " + std::to_string(k) + " is empty");
    }
    std::sort(c.begin(), c.end());
    if (std::adjacent_find(c.begin(), c.end()) != c.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  "clique " + std::to_string(k) + " lists a node twice");
    }
    if (c.front() < 0 || c.back() >= p) {
      throw Error(ErrorCode::InvalidArgument,
                  "clique " + std::to_string(k) + " has an index outside [0, p)");
    }
  }

  std::vector<char> covered(p, 0);
  for (const auto& c : cliques)
    for (NodeId v : c) covered[v] = 1;
  for (int v = 0; v < p; ++v) {
    if (!covered[v]) {
      throw Error(ErrorCode::UncoveredNode, "node " + std::to_string(v) + " is in no clique");
    }
  }

  for (std::size_t a = 0; a < cliques.size(); ++a) {
    for (std::size_t b = 0; b < cliques.size(); ++b) {
      if (a != b && is_subset(cliques[a], cliques[b])) {
        throw Error(ErrorCode::RedundantClique, "clique " + std::to_string(a) +
                                                    " is contained in clique " + std::to_string(b));
      }
    }
  }

  DecomposableGraph g;
  g.p_ = p;
  g.sets_ = derive_sets(p, cliques);
  g.parent_.assign(cliques.size(), -1);
  for (std::size_t k = 1; k < cliques.size(); ++k) {
    const auto& sep = g.sets_.separator[k];
    if (sep.empty()) {
      throw Error(ErrorCode::NotPerfectOrder,
                  "clique " + std::to_string(k) + " has an empty separator (graph is disconnected)");
    }
    for (int j = static_cast<int>(k) - 1; j >= 0; --j) {
      if (is_subset(sep, cliques[j])) {
        g.parent_[k] = j;
        break;
      }
    }
    if (g.parent_[k] < 0) {
      throw Error(ErrorCode::NotPerfectOrder,
                  "running intersection fails at clique " + std::to_string(k));
    }
  }
  g.cliques_ = std::move(cliques);
  return g;
}

std::size_t DecomposableGraph::max_clique_size() const {
  std::size_t m = 0;
  for (const auto& c : cliques_) m = std::max(m, c.size());
  return m;
}

std::size_t DecomposableGraph::max_separator_size() const {
  std::size_t m = 0;
  for (const auto& s : sets_.separator) m = std::max(m, s.size());
  return m;
}

DecomposableGraph random_decomposable(int p, int K, int max_sep, std::uint64_t seed) {
  if (K < 1 || max_sep < 1 || p < 1) {
    throw Error(ErrorCode::InfeasibleShape, "need K >= 1, max_sep >= 1 and p >= 1");
  }
  if (K > 1 && p < K + 1) {
    throw Error(ErrorCode::InfeasibleShape,
                "p = " + std::to_string(p) + " is too small for " + std::to_string(K) + " cliques");
  }
  Rng rng(seed);

  // new-node counts: first clique gets >= 2 so it can host a proper separator
  std::vector<int> fresh(K, 1);
  fresh[0] = K > 1 ? 2 : p;
  int spare = p - std::accumulate(fresh.begin(), fresh.end(), 0);
  while (spare-- > 0) fresh[rng.below(K)]++;

  std::vector<NodeId> label(p);
  std::iota(label.begin(), label.end(), 0);
  for (int i = p - 1; i > 0; --i) std::swap(label[i], label[rng.below(i + 1)]);

  std::vector<IndexSet> cliques(K);
  int next = 0;
  for (int k = 0; k < K; ++k) {
    IndexSet c;
    if (k > 0) {
      const IndexSet& host = cliques[rng.below(k)];
      const int cap = std::min<int>(max_sep, static_cast<int>(host.size()) - 1);
      const int s = 1 + static_cast<int>(rng.below(cap));
      IndexSet pool = host;
      for (int i = 0; i < s; ++i) {
        std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
        c.push_back(pool[i]);
      }
    }
    for (int i = 0; i < fresh[k]; ++i) c.push_back(label[next++]);
    std::sort(c.begin(), c.end());
    cliques[k] = std::move(c);
  }
  return DecomposableGraph::build(p, std::move(cliques));
}

}  // namespace dpca
