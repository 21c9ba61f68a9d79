#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dpca/anomaly.hpp"
#include "dpca/eigensolver.hpp"
#include "dpca/error.hpp"
#include "dpca/io.hpp"
#include "dpca/runtime.hpp"
#include "dpca/synth.hpp"

namespace dpca::cli {
namespace {

struct RunConfig {
  std::string command;
  std::string preset = "two-clique-toy";
  std::string graph;
  std::string data;
  int components = 1;
  std::optional<double> tol;  // per-command default
  int window = 500;
  int overlap = 400;
  double warm_margin = 0.1;
  std::uint64_t seed = 1;
  bool oracle = false;
  std::vector<std::string> compare;
  bool iters = false;
  bool center = false;
  std::string out;
  double quantile = 0.995;
  std::optional<double> threshold;
  int train = 0;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

SampleSet load_data(const RunConfig& cfg) {
  auto data = read_samples(cfg.data);
  if (cfg.center) center_columns(data);
  return data;
}

/// Writes to --out when given, otherwise to `out`.
void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out.empty()) {
    out << text;
  } else {
    write_text(cfg.out, text);
  }
}

void cmd_gen(const RunConfig& cfg, std::ostream& out) {
  namespace fs = std::filesystem;
  const auto ds = make_preset(cfg.preset, cfg.seed);
  const fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory '" + dir.string() + "'");
  write_graph((dir / "graph.json").string(), ds.graph);
  write_samples((dir / "samples.csv").string(), ds.samples);
  for (std::size_t a = 0; a < ds.alternatives.size(); ++a)
    write_graph((dir / ("graph_" + ds.alternative_names[a] + ".json")).string(), ds.alternatives[a]);
  write_text((dir / "manifest.json").string(), manifest_json(ds, "graph.json", "samples.csv"));
  out << "preset " << ds.preset << " p " << ds.graph.p() << " cliques " << ds.graph.clique_count()
      << " samples " << ds.samples.n() << " injections " << ds.injections.size() << "\n";
}

void cmd_eig(const RunConfig& cfg, std::ostream& out) {
  const double tol = cfg.tol.value_or(1e-8);
  require(tol > 0, "--tol must be positive");
  const auto g = read_graph(cfg.graph);
  const auto data = load_data(cfg);
  require(cfg.components >= 1 && cfg.components <= g.p(),
          "--components must lie in [1, p] (p = " + std::to_string(g.p()) + ")");
  auto net = spawn_cliques(g, data);
  const auto assembled = run_protocol(net, ProtocolRequest::assemble());
  const auto res = run_protocol(net, ProtocolRequest::spectrum(cfg.components, tol));

  std::ostringstream os;
  os << "p," << g.p() << "\ncliques," << g.clique_count() << "\nsamples," << data.n() << "\n";
  os << "component,lambda,bracket_width,iterations\n";
  for (std::size_t c = 0; c < res.pairs.size(); ++c) {
    os << c + 1 << ',' << format_double(res.pairs[c].value) << ','
       << format_double(res.pairs[c].bracket_width) << ',' << res.pairs[c].iterations << "\n";
  }
  std::vector<MessageRecord> log = assembled.log;
  log.insert(log.end(), res.log.begin(), res.log.end());
  const auto st = message_stats(log, g.p());
  os << "messages," << st.count << "\nmax_message_dim," << st.max_dim << "\ntotal_message_bytes,"
     << st.total_bytes << "\ncentralized_dim," << st.centralized_dim << "\n";
  if (cfg.oracle) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(assembled.concentration->to_dense());
    os << "component,oracle_lambda,abs_delta,angle\n";
    for (std::size_t c = 0; c < res.pairs.size(); ++c) {
      const double ref = eig.eigenvalues()(static_cast<Eigen::Index>(c));
      const double cosang = std::min(1.0, std::abs(eig.eigenvectors().col(static_cast<Eigen::Index>(c))
                                                       .dot(res.pairs[c].vector)));
      os << c + 1 << ',' << format_double(ref) << ',' << format_double(std::abs(res.pairs[c].value - ref))
         << ',' << format_double(std::acos(cosang)) << "\n";
    }
  }
  emit(cfg, out, os.str());
}

void cmd_track(const RunConfig& cfg, std::ostream& out) {
  require(cfg.window >= 1, "--window must be positive");
  require(cfg.overlap >= 0 && cfg.overlap < cfg.window, "--overlap must satisfy 0 <= overlap < window");
  const double tol = cfg.tol.value_or(1e-3);
  require(tol > 0, "--tol must be positive");
  require(cfg.warm_margin > 0, "--warm-margin must be positive");
  const auto g = read_graph(cfg.graph);
  const auto data = load_data(cfg);
  TrackOptions opts;
  opts.window = cfg.window;
  opts.overlap = cfg.overlap;
  opts.eps = tol;
  opts.warm_margin = cfg.warm_margin;
  const auto trace = track(data, g, opts);

  std::size_t max_iters = 0;
  for (const auto& pt : trace) max_iters = std::max(max_iters, pt.estimates.size());
  std::ostringstream os;
  os << "window_start,lambda,bracket_width,iterations,messages_bytes";
  if (cfg.oracle) os << ",oracle_abs_error";
  if (cfg.iters)
    for (std::size_t i = 1; i <= max_iters; ++i) os << ",iter_" << i;
  os << "\n";
  for (const auto& pt : trace) {
    os << pt.window_start << ',' << format_double(pt.lambda) << ',' << format_double(pt.bracket_width)
       << ',' << pt.iterations << ',' << pt.message_bytes;
    if (cfg.oracle) {
      const SampleSet win{data.samples.middleRows(pt.window_start, cfg.window)};
      Eigen::SelfAdjointEigenSolver<Matrix> eig(fit_concentration(g, win).to_dense(),
                                                Eigen::EigenvaluesOnly);
      os << ',' << format_double(std::abs(pt.lambda - eig.eigenvalues()(0)));
    }
    if (cfg.iters)
      for (std::size_t i = 0; i < max_iters; ++i) {
        os << ',';
        if (i < pt.estimates.size()) os << format_double(pt.estimates[i]);
      }
    os << "\n";
  }
  emit(cfg, out, os.str());
}

void cmd_detect(const RunConfig& cfg, std::ostream& out) {
  require(!cfg.threshold || *cfg.threshold > 0, "--threshold must be positive");
  require(cfg.quantile > 0 && cfg.quantile < 1, "--quantile must lie in (0, 1)");
  const double tol = cfg.tol.value_or(1e-10);
  require(tol > 0, "--tol must be positive");
  const auto g = read_graph(cfg.graph);
  const auto data = load_data(cfg);
  require(cfg.components >= 1 && cfg.components <= g.p(),
          "--components must lie in [1, p] (p = " + std::to_string(g.p()) + ")");
  require(cfg.train >= 0 && cfg.train <= data.n(), "--train must lie in [0, n]");

  const auto model = fit_model(data, g, cfg.components, tol);
  const Vector resid = residual_norms(model, data);
  const Threshold th = cfg.threshold ? Threshold::absolute(*cfg.threshold) : Threshold::quantile(cfg.quantile);
  Vector reference;
  if (cfg.train > 0) reference = resid.head(cfg.train);
  const auto flagged = detect(resid, th, cfg.train > 0 ? &reference : nullptr);

  std::vector<std::string> names;
  std::vector<Vector> extra;
  Vector dense;
  if (!cfg.compare.empty()) {
    dense = residual_norms(dense_pca_basis(data, cfg.components), data);
    for (const auto& path : cfg.compare) {
      const auto alt = read_graph(path);
      require(alt.p() == g.p(), "comparison graph '" + path + "' has a different p");
      names.push_back(std::filesystem::path(path).stem().string());
      extra.push_back(residual_norms(fit_model(data, alt, cfg.components, tol), data));
    }
  }

  std::vector<char> is_flagged(static_cast<std::size_t>(data.n()), 0);
  for (int i : flagged) is_flagged[i] = 1;
  std::ostringstream os;
  os << "index,residual,flagged";
  for (const auto& n : names) os << ",residual_" << n;
  if (!cfg.compare.empty()) os << ",residual_dense";
  os << "\n";
  for (int i = 0; i < data.n(); ++i) {
    os << i << ',' << format_double(resid(i)) << ',' << int(is_flagged[i]);
    for (const auto& e : extra) os << ',' << format_double(e(i));
    if (!cfg.compare.empty()) os << ',' << format_double(dense(i));
    os << "\n";
  }
  emit(cfg, out, os.str());

  std::ostream& summary = cfg.out.empty() ? std::cerr : out;
  summary << "flagged";
  for (int i : flagged) summary << ' ' << i;
  summary << "\n";
  if (!cfg.compare.empty()) {
    summary << "mean_abs_error_vs_dense primary " << format_double((resid - dense).cwiseAbs().mean()) << "\n";
    for (std::size_t a = 0; a < extra.size(); ++a) {
      summary << "mean_abs_error_vs_dense " << names[a] << ' '
              << format_double((extra[a] - dense).cwiseAbs().mean()) << "\n";
    }
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Distributed PCA for decomposable Gaussian graphical models", "dpca"};
  app.require_subcommand(1, 1);

  auto add_graph_data = [&](CLI::App* sub) {
    sub->add_option("--graph", cfg.graph, "graph JSON")->required();
    sub->add_option("--data", cfg.data, "samples CSV")->required();
    sub->add_flag("--center", cfg.center, "subtract column means");
    sub->add_option("--out", cfg.out, "output file (default stdout)");
  };

  auto* gen = app.add_subcommand("gen", "write a synthetic graph, samples and manifest");
  gen->add_option("--preset", cfg.preset, "paper-tracking | two-clique-toy | abilene-like");
  gen->add_option("--seed", cfg.seed, "64-bit seed");
  gen->add_option("--out", cfg.out, "output directory");

  auto* eig = app.add_subcommand("eig", "principal eigenpairs of the ML concentration");
  add_graph_data(eig);
  eig->add_option("--components", cfg.components, "number of components j");
  eig->add_option("--tol", cfg.tol, "bisection tolerance");
  eig->add_flag("--oracle", cfg.oracle, "compare with a dense eigendecomposition");
  eig->add_option("--seed", cfg.seed, "unused; accepted for uniformity");

  auto* trk = app.add_subcommand("track", "sliding-window tracking of eig_min(K)");
  add_graph_data(trk);
  trk->add_option("--window", cfg.window, "window length n");
  trk->add_option("--overlap", cfg.overlap, "samples shared by consecutive windows");
  trk->add_option("--tol", cfg.tol, "bisection tolerance");
  trk->add_option("--warm-margin", cfg.warm_margin, "half width of the warm bracket");
  trk->add_flag("--oracle", cfg.oracle, "add |lambda - dense| column");
  trk->add_flag("--iters", cfg.iters, "add per-iteration estimates");

  auto* det = app.add_subcommand("detect", "residual-norm anomaly detection");
  add_graph_data(det);
  det->add_option("--components", cfg.components, "number of components j");
  det->add_option("--tol", cfg.tol, "bisection tolerance");
  det->add_option("--quantile", cfg.quantile, "quantile threshold in (0, 1)");
  det->add_option("--threshold", cfg.threshold, "absolute threshold");
  det->add_option("--train", cfg.train, "leading samples forming the reference period");
  det->add_option("--compare", cfg.compare, "graph JSON files to compare against dense PCA");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "dpca: error[Usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) {
      cmd_gen(cfg, out);
    } else if (eig->parsed()) {
      cmd_eig(cfg, out);
    } else if (trk->parsed()) {
      cmd_track(cfg, out);
    } else {
      cmd_detect(cfg, out);
    }
  } catch (const UsageError& e) {
    err << "dpca: error[Usage]: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "dpca: error[" << code_name(e.code()) << "]: " << msg << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "dpca: error[Internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace dpca::cli
