#include "dpca/synth.hpp"

#include <algorithm>
#include <numeric>

#include "dpca/error.hpp"

namespace dpca {

BlockSparseConcentration random_concentration(const DecomposableGraph& graph, Rng& rng,
                                              double diag_shift) {
  Matrix dense = Matrix::Zero(graph.p(), graph.p());
  for (const auto& c : graph.cliques()) {
    const auto m = static_cast<Eigen::Index>(c.size());
    Matrix w(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < m; ++i) w(i, j) = rng.normal();
    const Matrix block = w * w.transpose() / static_cast<double>(m) + diag_shift * Matrix::Identity(m, m);
    const std::vector<int> idx(c.begin(), c.end());
    dense(idx, idx) += block;
  }
  return BlockSparseConcentration::from_dense(graph, symmetrized(dense));
}

SampleSet sample_gaussian(const Matrix& concentration, int n, Rng& rng) {
  const auto p = concentration.rows();
  Eigen::LLT<Matrix> llt(concentration);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "concentration matrix is not positive definite");
  }
  Matrix w(p, n);
  for (int i = 0; i < n; ++i)
    for (Eigen::Index r = 0; r < p; ++r) w(r, i) = rng.normal();
  const Matrix x = llt.matrixU().solve(w);
  return {x.transpose()};
}

SampleSet sample_standard(int p, int n, Rng& rng) {
  Matrix x(n, p);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < p; ++c) x(i, c) = rng.normal();
  return {x};
}

Instance random_instance(std::uint64_t seed, int max_p, int max_cliques, int max_sep) {
  Rng rng(seed);
  const int cliques = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_cliques)));
  const int min_p = cliques == 1 ? 2 : cliques + 1;
  const int p = min_p + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_p - min_p + 1)));
  auto g = random_decomposable(p, cliques, max_sep, rng.next_u64());
  auto K = random_concentration(g, rng);
  return {std::move(g), std::move(K)};
}

DecomposableGraph permuted_graph(const DecomposableGraph& graph, Rng& rng) {
  std::vector<int> perm(graph.p());
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = graph.p() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  std::vector<IndexSet> cliques;
  for (const auto& c : graph.cliques()) {
    IndexSet mapped;
    for (int v : c) mapped.push_back(perm[v]);
    std::sort(mapped.begin(), mapped.end());
    cliques.push_back(std::move(mapped));
  }
  return DecomposableGraph::build(graph.p(), std::move(cliques));
}

std::vector<Injection> inject_spikes(SampleSet& data, const Matrix& concentration, int j, int count,
                                     double sigmas, Rng& rng) {
  const auto p = concentration.rows();
  if (count > data.n()) throw Error(ErrorCode::InvalidArgument, "more spikes than samples");
  // eigenvectors of K ascending: the first j span the principal subspace
  Eigen::SelfAdjointEigenSolver<Matrix> eig(concentration);
  const Matrix principal = eig.eigenvectors().leftCols(j);
  double resid_var = 0.0;
  for (Eigen::Index i = j; i < p; ++i) resid_var += 1.0 / eig.eigenvalues()(i);
  const double sigma = std::sqrt(resid_var / static_cast<double>(p - j));

  std::vector<int> idx(data.n());
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i)
    std::swap(idx[i], idx[i + static_cast<int>(rng.below(static_cast<std::uint64_t>(data.n() - i)))]);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());

  std::vector<Injection> out;
  for (int t : idx) {
    Vector d(p);
    for (Eigen::Index r = 0; r < p; ++r) d(r) = rng.normal();
    d -= principal * (principal.transpose() * d);
    d.normalize();
    Injection inj{t, sigmas * sigma, d};
    data.samples.row(t) += inj.amplitude * d.transpose();
    out.push_back(std::move(inj));
  }
  return out;
}

namespace {

IndexSet range(int lo, int hi) {
  IndexSet r(hi - lo);
  std::iota(r.begin(), r.end(), lo);
  return r;
}

IndexSet join(IndexSet a, const IndexSet& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

DecomposableGraph tracking_graph() {
  const IndexSet shared = range(300, 305);
  return DecomposableGraph::build(305, {join(range(0, 100), shared), join(range(100, 200), shared),
                                        join(range(200, 300), shared)});
}

DecomposableGraph toy_graph() { return DecomposableGraph::build(3, {{0, 1}, {1, 2}}); }

// West 0..13, west/centre boundary 14..19, centre 20..27, centre/east
// boundary 28..31, east 32..40.
DecomposableGraph link_graph_three() {
  return DecomposableGraph::build(41, {range(0, 20), range(14, 32), range(28, 41)});
}

DecomposableGraph link_graph_two() { return DecomposableGraph::build(41, {range(0, 20), range(14, 41)}); }

std::vector<std::string> preset_names() { return {"paper-tracking", "two-clique-toy", "abilene-like"}; }

Dataset make_preset(const std::string& name, std::uint64_t seed) {
  Rng rng(seed);
  if (name == "paper-tracking") {
    auto g = tracking_graph();
    auto truth = BlockSparseConcentration::from_dense(g, Matrix::Identity(305, 305));
    auto samples = sample_standard(305, 5500, rng);
    return {name, seed, std::move(g), {}, {}, std::move(truth), std::move(samples), {}};
  }
  if (name == "two-clique-toy") {
    auto g = toy_graph();
    auto truth = random_concentration(g, rng);
    auto samples = sample_gaussian(truth.to_dense(), 200, rng);
    return {name, seed, std::move(g), {}, {}, std::move(truth), std::move(samples), {}};
  }
  if (name == "abilene-like") {
    auto g = link_graph_three();
    auto truth = random_concentration(g, rng);
    const Matrix dense = truth.to_dense();
    auto samples = sample_gaussian(dense, 1000, rng);
    auto injections = inject_spikes(samples, dense, 4, 5, 10.0, rng);
    std::vector<DecomposableGraph> alts{link_graph_two(), permuted_graph(g, rng)};
    return {name,
            seed,
            std::move(g),
            std::move(alts),
            {"two-clique", "random"},
            std::move(truth),
            std::move(samples),
            std::move(injections)};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
}

}  // namespace dpca
