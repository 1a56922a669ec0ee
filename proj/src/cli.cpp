#include "rdnet/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "rdnet/equilibrium.hpp"
#include "rdnet/error.hpp"
#include "rdnet/experiments.hpp"
#include "rdnet/graph.hpp"
#include "rdnet/instance_io.hpp"
#include "rdnet/stability.hpp"

namespace rdnet {

namespace {

struct RunConfig {
  std::string instance_path;
  std::string network = "complete";
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool raw = false;

  // Inline two-type instance, used when no instance file is given.
  std::size_t n = 4;
  double rho = 0.5;
  double theta_low = 1.0;
  std::optional<double> phi;
  double alpha = 2.0;
  double c_bar = 1.0;
};

std::uint64_t resolve_seed(const RunConfig& cfg) {
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("RDNET_SEED")) {
    std::uint64_t v = 0;
    const std::string s(env);
    std::size_t used = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size() || s[0] == '-')
      throw std::invalid_argument("RDNET_SEED is not an unsigned 64-bit integer: '" + s + "'");
    return v;
  }
  return kDefaultSeed;
}

InstanceFile load(const RunConfig& cfg) {
  if (!cfg.instance_path.empty()) return load_instance(cfg.instance_path);
  const TwoTypeConfig tt{cfg.n, cfg.rho, cfg.theta_low};
  const auto profile = tt.profile();
  const MarketParams params{cfg.alpha, cfg.c_bar, cfg.phi.value_or(phi_lower_bound(cfg.n))};
  return {validate_instance(params, profile), tt};
}

Network network_for(const std::string& spec, const ProductivityProfile& profile, std::uint64_t seed) {
  const std::size_t n = profile.size();
  if (spec == "complete") return complete(n);
  if (spec == "empty") return empty(n);
  if (spec == "pa") {
    // Links firms with bitwise-equal productivity.
    const auto labels = productivity_labels(profile);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (labels[i] == labels[j]) edges.push_back({i, j});
    return Network(n, edges);
  }
  if (spec.rfind("er:", 0) == 0) {
    std::size_t used = 0;
    const double ell = std::stod(spec.substr(3), &used);
    if (used != spec.size() - 3) throw std::invalid_argument("bad network spec '" + spec + "'");
    return erdos_renyi(n, ell, seed);
  }
  if (spec.rfind("file:", 0) == 0) {
    std::ifstream is(spec.substr(5));
    if (!is) throw std::invalid_argument("cannot open network file '" + spec.substr(5) + "'");
    return read_edge_list(is, n);
  }
  throw std::invalid_argument("unknown network spec '" + spec + "' (complete|empty|pa|er:<l>|file:<path>)");
}

// Writes `text` to <out>/<name>, or to `os` when no output directory is set.
void emit(const RunConfig& cfg, const std::string& name, const std::string& text, std::ostream& os) {
  if (cfg.out.empty()) {
    os << text;
    return;
  }
  std::filesystem::create_directories(cfg.out);
  const auto path = std::filesystem::path(cfg.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    v.push_back(std::stod(item, &used));
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
  }
  return v;
}

// "lo:hi:count"
std::vector<double> parse_range(const std::string& s, bool logarithmic) {
  const auto parts = [&] {
    std::string t = s;
    std::replace(t.begin(), t.end(), ':', ',');
    return parse_list(t);
  }();
  if (parts.size() != 3 || parts[2] < 1 || parts[2] != static_cast<double>(static_cast<std::size_t>(parts[2])))
    throw std::invalid_argument("grid must be lo:hi:count, got '" + s + "'");
  const auto count = static_cast<std::size_t>(parts[2]);
  if (logarithmic) return log_grid(parts[0], parts[1], count);
  if (count == 1) return {parts[0]};
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k)
    g[k] = parts[0] + (parts[1] - parts[0]) * static_cast<double>(k) / static_cast<double>(count - 1);
  return g;
}

std::string fixed8(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8f", x);
  return buf;
}

void add_instance_options(CLI::App* app, RunConfig& cfg) {
  app->add_option("--instance", cfg.instance_path, "Instance JSON file")->check(CLI::ExistingFile);
  app->add_option("--n", cfg.n, "Inline two-type instance: number of firms");
  app->add_option("--rho", cfg.rho, "Inline: share of high-type firms");
  app->add_option("--theta-low", cfg.theta_low, "Inline: low-type productivity");
  app->add_option("--phi", cfg.phi, "Inline: R&D cost (default: lower bound for n)");
  app->add_option("--alpha", cfg.alpha, "Inline: demand intercept");
  app->add_option("--c-bar", cfg.c_bar, "Inline: base marginal cost");
}

void add_common_options(CLI::App* app, RunConfig& cfg) {
  app->add_option("--out", cfg.out, "Output directory");
  app->add_option("--seed", cfg.seed, "Base seed (overrides RDNET_SEED)");
  app->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"R&D network equilibrium, stability and experiment runner", "rdnet"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* solve = app.add_subcommand("solve", "Solve the equilibrium of one instance on one network");
  add_instance_options(solve, cfg);
  add_common_options(solve, cfg);
  solve->add_option("--network", cfg.network, "complete|empty|pa|er:<l>|file:<path>");

  auto* stab = app.add_subcommand("stability", "Pairwise stability tools");
  stab->require_subcommand(1);
  auto* check = stab->add_subcommand("check", "Check one network");
  add_instance_options(check, cfg);
  add_common_options(check, cfg);
  check->add_option("--network", cfg.network, "complete|empty|pa|er:<l>|file:<path>");
  bool first_only = false;
  check->add_flag("--first", first_only, "Stop at the first blocking pair");

  auto* enumerate = stab->add_subcommand("enumerate", "Check every network on the instance's firms");
  add_instance_options(enumerate, cfg);
  add_common_options(enumerate, cfg);
  bool dedup = false;
  enumerate->add_flag("--dedup", dedup, "One network per productivity-preserving isomorphism class");

  auto* region = stab->add_subcommand("region", "Stability region of a structure over a (theta, phi) grid");
  add_common_options(region, cfg);
  std::string structure = "complete", theta_range, phi_range;
  region->add_option("--structure", structure, "complete|pa")->check(CLI::IsMember({"complete", "pa"}));
  region->add_option("--n", cfg.n, "Number of firms");
  region->add_option("--rho", cfg.rho, "Share of high-type firms");
  region->add_option("--theta-grid", theta_range, "lo:hi:count, linear (default 0.01:0.99:99)");
  region->add_option("--phi-grid", phi_range, "lo:hi:count, log-spaced (default bound:10*bound:101)");
  bool phi_per_n = false;
  region->add_flag("--phi-per-n", phi_per_n, "Read the phi grid as phi / n");

  auto* exp = app.add_subcommand("experiment", "Run a figure experiment and write CSV + manifest");
  add_common_options(exp, cfg);
  std::string exp_id, theta_list, phi_list, rho_list, ell_list;
  std::vector<std::size_t> n_list;
  int replications = 0;
  exp->add_option("id", exp_id, "fig1|fig2|fig3|fig4|fig5|fig6|figA1|figA2")->required();
  exp->add_flag("--raw", cfg.raw, "Also emit per-replication rows");
  exp->add_option("--replications", replications, "Replications (default per experiment)")
      ->check(CLI::PositiveNumber);
  exp->add_option("--n", n_list, "Firm count(s)");
  exp->add_option("--theta-grid", theta_list, "Comma-separated theta values");
  exp->add_option("--phi-grid", phi_list, "Comma-separated phi values (phi / n for figA2)");
  exp->add_option("--rho-grid", rho_list, "Comma-separated rho values");
  exp->add_option("--ell-grid", ell_list, "Comma-separated link probabilities (fig1)");

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    const std::uint64_t seed = resolve_seed(cfg);
    if (*solve) {
      const auto inst = load(cfg).instance;
      const Network net = network_for(cfg.network, inst.profile(), seed);
      const Equilibrium eq = equilibrium(net, inst.profile(), inst.params());
      emit(cfg, "equilibrium.json", to_json(eq).dump(2) + "\n", out);
      out << "welfare " << fixed8(eq.welfare) << " cs " << fixed8(eq.consumer_surplus) << " ps "
          << fixed8(eq.producer_surplus) << '\n';
    } else if (*check) {
      const auto inst = load(cfg).instance;
      const Network net = network_for(cfg.network, inst.profile(), seed);
      StabilityOptions o;
      o.stop_at_first = first_only;
      const auto report = is_pairwise_stable(net, inst.profile(), inst.params(), o);
      emit(cfg, "stability.json", to_json(report).dump(2) + "\n", out);
      out << (report.stable ? "stable" : "not stable") << " blocking " << report.blocking.size() << '\n';
    } else if (*enumerate) {
      const auto inst = load(cfg).instance;
      EnumerateOptions o;
      o.dedup = dedup;
      o.threads = cfg.threads;
      const auto e = enumerate_stable(inst.n(), inst.profile(), inst.params(), o);
      std::ostringstream csv;
      write_enumeration_csv(csv, e.space, e.verdicts);
      emit(cfg, "enumeration.csv", csv.str(), out);
      out << "networks " << e.verdicts.size() << " stable " << e.stable_set().size() << '\n';
    } else if (*region) {
      RegionSpec rs;
      rs.structure = structure == "pa" ? Structure::PositiveAssortative : Structure::Complete;
      rs.n = cfg.n;
      rs.rho = cfg.rho;
      rs.theta_grid = theta_range.empty() ? percent_grid(1, 99) : parse_range(theta_range, false);
      const double lb = phi_per_n ? phi_lower_bound(cfg.n) / static_cast<double>(cfg.n) : phi_lower_bound(cfg.n);
      rs.phi_grid = phi_range.empty() ? log_grid(lb, 10.0 * lb, 101) : parse_range(phi_range, true);
      rs.phi_per_n = phi_per_n;
      rs.threads = cfg.threads;
      const auto r = stability_region(rs);
      std::ostringstream csv;
      write_region_csv(csv, r);
      emit(cfg, "region.csv", csv.str(), out);
      out << "cells " << r.mask.size() << " stable " << std::count(r.mask.begin(), r.mask.end(), 1) << '\n';
    } else if (*exp) {
      SweepSpec spec;
      spec.experiment = exp_id;
      spec.base_seed = seed;
      spec.replications = replications;
      spec.threads = cfg.threads;
      spec.raw = cfg.raw;
      spec.n_grid = n_list;
      if (!theta_list.empty()) spec.theta_grid = parse_list(theta_list);
      if (!phi_list.empty()) spec.phi_grid = parse_list(phi_list);
      if (!rho_list.empty()) spec.rho_grid = parse_list(rho_list);
      if (!ell_list.empty()) spec.ell_grid = parse_list(ell_list);
      const auto result = run_experiment(spec);
      const std::string dir = cfg.out.empty() ? "results" : cfg.out;
      write_result(result, dir);
      out << exp_id << " seed " << seed << " tables " << result.tables.size() << " -> " << dir << '\n';
    }
    return kExitOk;
  } catch (const UnknownExperiment& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnknownExperiment;
  } catch (const DomainError& e) {
    err << "validation error:";
    for (const auto& v : e.violations()) err << ' ' << v << ';';
    err << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const BracketFailure& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const TooLarge& e) {
    err << "too large: " << e.what() << '\n';
    return kExitTooLarge;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace rdnet
