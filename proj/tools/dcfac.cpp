// Command-line front end: solve one instance, benchmark a manifest, run the
// self-check suites, or generate product instances.

#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcfac/dc_core.hpp"
#include "dcfac/driver.hpp"
#include "dcfac/instances.hpp"
#include "dcfac/model.hpp"
#include "dcfac/oracle.hpp"
#include "dcfac/rng.hpp"

namespace {

using dcfac::BetaMode;
using dcfac::Instance;
using dcfac::Objective;
using dcfac::ProblemKind;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kReportSchema = "dcfac-report-v1";
constexpr const char* kBenchHeader = "name,n,bval,obj,gap_percent,time_s,infeas_inf,normal_exit,note";

std::string basename_no_ext(const std::string& path) {
  std::size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base;
}

std::string dirname_of(const std::string& path) {
  std::size_t slash = path.find_last_of("/\\");
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

std::string join_path(const std::string& dir, const std::string& rel) {
  if (!rel.empty() && rel.front() == '/') return rel;
  return dir + "/" + rel;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("DCFAC_SEED");
  if (env == nullptr || *env == '\0') return 1;
  std::uint64_t out = 0;
  const char* last = env + std::char_traits<char>::length(env);
  auto res = std::from_chars(env, last, out);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw std::runtime_error(std::string("DCFAC_SEED is not an unsigned integer: '") + env + "'");
  }
  return out;
}

BetaMode parse_beta(const std::string& s) {
  if (s == "nesterov") return BetaMode::Nesterov;
  if (s == "zero") return BetaMode::Zero;
  throw std::runtime_error("unknown --beta mode '" + s + "' (expected nesterov or zero)");
}

std::pair<Objective, Instance> load_instance(const std::string& path, const std::string& format,
                                             const std::string& kind, int index) {
  std::string text = dcfac::read_text_file(path);
  if (format == "edgelist") {
    if (kind != "maxcut") {
      throw std::runtime_error("format 'edgelist' only describes max-cut instances");
    }
    dcfac::EdgeList g = dcfac::parse_edgelist(text);
    dcfac::SymBuilder b(g.n);
    for (const auto& e : g.edges) b.add(e.i, e.j, e.v);
    return dcfac::build_maxcut(b.build(), basename_no_ext(path));
  }
  if (format == "orlib") {
    if (kind != "ubqp") {
      throw std::runtime_error("format 'orlib' only describes ubqp instances");
    }
    auto problems = dcfac::parse_orlib(text);
    if (index < 0 || index >= static_cast<int>(problems.size())) {
      throw std::runtime_error("problem index " + std::to_string(index) + " out of range; file holds " +
                               std::to_string(problems.size()) + " problems");
    }
    std::string name = basename_no_ext(path);
    if (index > 0) name += "#" + std::to_string(index);
    dcfac::SymBuilder b(problems[index].n);
    for (const auto& t : problems[index].entries) b.add_raw(t.i, t.j, t.v);
    return dcfac::build_ubqp(b.build(), name);
  }
  if (format == "canonical") {
    dcfac::CanonicalInstance inst = dcfac::read_canonical(text);
    std::string embedded = dcfac::problem_kind_name(inst.kind);
    if (kind != embedded) {
      throw std::runtime_error("--kind " + kind + " does not match the file's kind '" + embedded +
                               "'");
    }
    return dcfac::realize(inst);
  }
  throw std::runtime_error("unknown format '" + format + "'");
}

ordered_json trace_to_json(const std::vector<dcfac::InnerTracePoint>& trace) {
  ordered_json arr = ordered_json::array();
  for (const auto& pt : trace) {
    arr.push_back(ordered_json{{"k", pt.k},
                               {"f_value", pt.f_value},
                               {"specnorm_sq", pt.specnorm_sq},
                               {"merit", pt.merit},
                               {"residual", pt.residual},
                               {"theta", pt.theta}});
  }
  return arr;
}

ordered_json report_to_json(const dcfac::SolveReport& rep, bool emit_x, bool emit_traces) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["name"] = rep.name;
  j["problem"] = dcfac::problem_kind_name(rep.problem);
  j["n_binary"] = rep.n_binary;
  j["p"] = rep.p;
  j["m"] = rep.m;
  j["seed"] = rep.seed;
  j["beta_mode"] = rep.beta_mode == BetaMode::Nesterov ? "nesterov" : "zero";
  j["obj"] = rep.obj;
  j["obj_rounded"] = rep.obj_rounded;
  j["f_final"] = rep.f_final;
  j["bval"] = rep.bval ? ordered_json(*rep.bval) : ordered_json(nullptr);
  j["gap_percent"] = rep.gap_percent ? ordered_json(*rep.gap_percent) : ordered_json(nullptr);
  j["infeas_inf"] = rep.infeas_inf;
  j["infeas_two"] = rep.infeas_two;
  j["outer_iters"] = rep.outer_iters;
  j["inner_iters"] = rep.inner_iters;
  j["rho_final"] = rep.rho_final;
  j["exited_normally"] = rep.exited_normally;
  j["exit_reason"] = rep.exit_reason;
  j["rank_one_gap_final"] = rep.rank_one_gap_final;
  j["sigma1"] = rep.sigma1;
  j["sigma_ratio"] = rep.sigma_ratio;
  j["bound_term"] = rep.bound_term;
  j["wall_time_s"] = rep.wall_time_s;
  if (emit_x) {
    j["x"] = rep.x;
    j["x_binary"] = rep.x_binary;
  }
  j["rho_trace"] = rep.rho_trace;
  j["specnorm_trace"] = rep.specnorm_trace;
  if (emit_traces) {
    ordered_json traces = ordered_json::array();
    for (const auto& tr : rep.inner_traces) traces.push_back(trace_to_json(tr));
    j["inner_traces"] = std::move(traces);
  }
  return j;
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + out_path);
  out << text;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void print_pretty(const dcfac::SolveReport& rep) {
  std::ostringstream out;
  out << rep.name << " (" << dcfac::problem_kind_name(rep.problem) << ", n=" << rep.n_binary
      << ", p=" << rep.p << ", m=" << rep.m << ", seed=" << rep.seed << ")\n";
  out << "  objective   " << fmt("%.10g", rep.obj) << "  (rounded " << fmt("%.10g", rep.obj_rounded)
      << ")\n";
  if (rep.bval) {
    out << "  best known  " << fmt("%.10g", *rep.bval);
    if (rep.gap_percent) out << "  gap " << fmt("%.4g", *rep.gap_percent) << "%";
    out << "\n";
  }
  out << "  infeas      inf " << fmt("%.3e", rep.infeas_inf) << "   two " << fmt("%.3e", rep.infeas_two)
      << "\n";
  out << "  iterations  outer " << rep.outer_iters << ", inner " << rep.inner_iters << ", rho_final "
      << fmt("%.6g", rep.rho_final) << "\n";
  out << "  exit        " << rep.exit_reason << (rep.exited_normally ? "" : " (limit)") << " in "
      << fmt("%.3f", rep.wall_time_s) << " s\n";
  std::cout << out.str();
}

struct SolveArgs {
  std::string instance_path;
  std::string format;
  std::string kind;
  std::optional<double> bval;
  double rho0 = 1e-3;
  double sigma = 1.005;
  double eps = 1e-8;
  double rho_max = 1e6;
  int l_max = 10000;
  int m = 0;
  std::optional<std::uint64_t> seed;
  std::string beta = "nesterov";
  std::optional<double> time_limit;
  std::string out_path;
  bool emit_x = false;
  bool trace = false;
  bool pretty = false;
  int index = 0;
};

int cmd_solve(const SolveArgs& args) {
  auto [objective, instance] = load_instance(args.instance_path, args.format, args.kind, args.index);

  dcfac::PenaltyConfig cfg;
  cfg.rho0 = args.rho0;
  cfg.sigma = args.sigma;
  cfg.eps = args.eps;
  cfg.rho_max = args.rho_max;
  cfg.l_max = args.l_max;
  cfg.m = args.m;
  cfg.seed = args.seed ? *args.seed : default_seed();
  cfg.beta_mode = parse_beta(args.beta);
  cfg.time_limit_s = args.time_limit;
  cfg.bval = args.bval;
  cfg.record_inner_traces = args.trace;

  dcfac::SolveReport rep = dcfac::solve(objective, instance, cfg);

  std::string json_text = report_to_json(rep, args.emit_x, args.trace).dump(2) + "\n";
  if (args.pretty) {
    print_pretty(rep);
    if (!args.out_path.empty()) write_output(json_text, args.out_path);
  } else {
    write_output(json_text, args.out_path);
  }
  return rep.exited_normally ? 0 : 2;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

struct BenchArgs {
  std::string manifest_path;
  int jobs = 1;
  std::string out_path;
};

int cmd_bench(const BenchArgs& args) {
  std::string dir = dirname_of(args.manifest_path);
  auto rows = dcfac::parse_manifest(dcfac::read_text_file(args.manifest_path));
  std::vector<std::string> lines(rows.size());
  std::uint64_t seed = default_seed();

  auto run_row = [&](std::size_t r) {
    const auto& row = rows[r];
    std::string name = basename_no_ext(row.path);
    std::string bval_str = row.bval ? fmt("%.10g", *row.bval) : "";
    try {
      auto [objective, instance] = load_instance(join_path(dir, row.path), row.format, row.kind,
                                                 row.index);
      dcfac::PenaltyConfig cfg;
      cfg.seed = seed;
      cfg.bval = row.bval;
      dcfac::SolveReport rep = dcfac::solve(objective, instance, cfg);
      std::string gap_str = rep.gap_percent ? fmt("%.6g", *rep.gap_percent) : "";
      lines[r] = csv_escape(rep.name) + "," + std::to_string(rep.n_binary) + "," + bval_str + "," +
                 fmt("%.10g", rep.obj) + "," + gap_str + "," + fmt("%.3f", rep.wall_time_s) + "," +
                 fmt("%.3e", rep.infeas_inf) + "," + (rep.exited_normally ? "1" : "0") + ",";
    } catch (const std::exception& e) {
      // name,n,bval,obj,gap_percent,time_s,infeas_inf,normal_exit,note
      lines[r] = csv_escape(name) + ",," + bval_str + ",,,,,0," + csv_escape(e.what());
    }
  };

  int jobs = std::max(1, args.jobs);
  if (jobs == 1) {
    for (std::size_t r = 0; r < rows.size(); ++r) run_row(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    int workers = std::min<std::size_t>(jobs, rows.size() == 0 ? 1 : rows.size());
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t r = next.fetch_add(1); r < rows.size(); r = next.fetch_add(1)) {
          run_row(r);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::string csv = std::string(kBenchHeader) + "\n";
  for (const auto& line : lines) csv += line + "\n";
  write_output(csv, args.out_path);
  return 0;
}

struct VerifyArgs {
  std::string suite;
  int trials = 0;  // 0: suite default
  std::uint64_t seed = 1;
};

dcfac::SparseSymMatrix random_dense_sym(int n, dcfac::Rng& rng, double lo, double hi) {
  dcfac::SymBuilder b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v = rng.uniform(lo, hi);
      if (i == j) b.add_raw(i, i, v);
      else b.add(i, j, v);
    }
  }
  return b.build();
}

dcfac::SparseSymMatrix random_graph(int n, dcfac::Rng& rng, double edge_prob) {
  dcfac::SymBuilder b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform01() < edge_prob) b.add(i, j, rng.uniform_int(0, 1) == 0 ? -1.0 : 1.0);
    }
  }
  return b.build();
}

int verify_tiny_exact(int trials, std::uint64_t seed) {
  dcfac::Rng rng(seed);
  int exact = 0;
  int feasible = 0;
  for (int t = 0; t < trials; ++t) {
    int n = rng.uniform_int(4, 12);
    auto [objective, instance] =
        dcfac::build_ubqp(random_dense_sym(n, rng, -5.0, 5.0), "tiny-" + std::to_string(t));
    dcfac::PenaltyConfig cfg;
    cfg.seed = seed;
    dcfac::SolveReport rep = dcfac::solve(objective, instance, cfg);

    double rounded = dcfac::objective_at_binary(instance, rep.x_binary);  // throws if infeasible
    ++feasible;
    dcfac::BruteForceResult bf = dcfac::brute_force(instance);
    bool hit = std::abs(rounded - bf.opt_value) <= 1e-6 * (1.0 + std::abs(bf.opt_value));
    if (hit) ++exact;
    std::printf("  tiny-%02d n=%2d solver=%.10g optimum=%.10g %s\n", t, n, rounded, bf.opt_value,
                hit ? "exact" : "off");
  }
  int bar = (trials * 9 + 9) / 10;  // ceil(0.9 trials)
  std::printf("tiny-exact: %d/%d feasible, %d/%d exact (bar %d)\n", feasible, trials, exact, trials,
              bar);
  return exact >= bar ? 0 : 1;
}

int verify_invariants(int trials, std::uint64_t seed) {
  dcfac::Rng rng(seed);
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    int n = rng.uniform_int(10, 50);
    std::pair<Objective, Instance> built =
        t % 2 == 0 ? dcfac::build_ubqp(random_dense_sym(n, rng, -5.0, 5.0),
                                       "inv-ubqp-" + std::to_string(t))
                   : dcfac::build_maxcut(random_graph(n, rng, 0.3), "inv-cut-" + std::to_string(t));
    dcfac::PenaltyConfig cfg;
    cfg.seed = seed;
    cfg.beta_mode = BetaMode::Zero;
    cfg.record_inner_traces = true;
    dcfac::SolveReport rep = dcfac::solve(built.first, built.second, cfg);

    for (std::size_t l = 0; l < rep.inner_traces.size(); ++l) {
      auto cr = dcfac::check_descent(rep.inner_traces[l], rep.rho_trace[l]);
      if (!cr.ok) {
        ++failures;
        std::printf("  %s: outer %zu: %s\n", rep.name.c_str(), l, cr.detail.c_str());
        break;
      }
    }

    int m = rng.uniform_int(2, 10);
    int p = rng.uniform_int(m + 1, 40);
    dcfac::FactorMatrix v = dcfac::init_factor(m, p, rng.next_u64());
    auto cg = dcfac::check_gamma(v.mat);
    if (!cg.ok) {
      ++failures;
      std::printf("  gamma check (m=%d, p=%d): %s\n", m, p, cg.detail.c_str());
    }
  }
  std::printf("invariants: %d trials, %d failures\n", trials, failures);
  return failures == 0 ? 0 : 1;
}

int verify_gradcheck(int trials, std::uint64_t seed) {
  dcfac::Rng rng(seed);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    // One linear and one product probe per trial.
    {
      auto [objective, instance] =
          dcfac::build_ubqp(random_dense_sym(8, rng, -3.0, 3.0), "grad-lin");
      dcfac::FactorMatrix v = dcfac::init_factor(4, objective.p, rng.next_u64());
      double err = dcfac::fd_gradient_check(objective, v.mat, 1e-6);
      worst = std::max(worst, err);
      if (err > 1e-5) {
        ++failures;
        std::printf("  linear probe %d: max rel err %.3e\n", t, err);
      }
      (void)instance;
    }
    {
      dcfac::CanonicalInstance ci = dcfac::gen_product_random(4, rng.next_u64());
      auto [objective, instance] = dcfac::realize(ci);
      dcfac::FactorMatrix v = dcfac::init_factor(4, objective.p, rng.next_u64());
      double err = dcfac::fd_gradient_check(objective, v.mat, 1e-6);
      worst = std::max(worst, err);
      if (err > 1e-5) {
        ++failures;
        std::printf("  product probe %d: max rel err %.3e\n", t, err);
      }
      (void)instance;
    }
  }
  std::printf("gradcheck: %d probes, worst %.3e, %d failures\n", 2 * trials, worst, failures);
  return failures == 0 ? 0 : 1;
}

int cmd_verify(const VerifyArgs& args) {
  if (args.suite == "tiny-exact") return verify_tiny_exact(args.trials > 0 ? args.trials : 30, args.seed);
  if (args.suite == "invariants") return verify_invariants(args.trials > 0 ? args.trials : 20, args.seed);
  if (args.suite == "gradcheck") return verify_gradcheck(args.trials > 0 ? args.trials : 20, args.seed);
  throw std::runtime_error("unknown suite '" + args.suite + "'");
}

struct GenArgs {
  std::string family;
  int l = 0;
  std::optional<std::uint64_t> seed;
  std::string w1;
  std::string w2;
  std::string out_path;
};

int cmd_gen(const GenArgs& args) {
  dcfac::CanonicalInstance inst;
  if (args.family == "product-random") {
    if (args.l < 1) throw std::runtime_error("--l must be at least 1");
    std::uint64_t seed = args.seed ? *args.seed : default_seed();
    inst = dcfac::gen_product_random(args.l, seed);
  } else if (args.family == "product-maxcut") {
    if (args.w1.empty() || args.w2.empty()) {
      throw std::runtime_error("product-maxcut needs --w1 and --w2");
    }
    dcfac::EdgeList g1 = dcfac::parse_edgelist(dcfac::read_text_file(args.w1));
    dcfac::EdgeList g2 = dcfac::parse_edgelist(dcfac::read_text_file(args.w2));
    inst = dcfac::gen_product_maxcut(g1, g2, "product-maxcut-" + basename_no_ext(args.w1) + "-" +
                                                 basename_no_ext(args.w2));
  } else {
    throw std::runtime_error("unknown family '" + args.family + "'");
  }
  write_output(dcfac::write_canonical(inst), args.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary polynomial program solver via penalized low-rank factorization"};
  app.require_subcommand(1);

  SolveArgs sargs;
  CLI::App* solve = app.add_subcommand("solve", "Solve one instance and emit a report");
  solve->add_option("--instance", sargs.instance_path, "Instance file")->required();
  solve->add_option("--format", sargs.format, "edgelist | orlib | canonical")->required();
  solve->add_option("--kind", sargs.kind, "maxcut | ubqp | product")->required();
  solve->add_option("--bval", sargs.bval, "Best known value for the gap column");
  solve->add_option("--rho0", sargs.rho0, "Initial penalty");
  solve->add_option("--sigma", sargs.sigma, "Penalty growth factor");
  solve->add_option("--eps", sargs.eps, "Rank-one gap target");
  solve->add_option("--rho-max", sargs.rho_max, "Penalty ceiling");
  solve->add_option("--lmax", sargs.l_max, "Outer iteration cap");
  solve->add_option("--m", sargs.m, "Factor rank (0 = automatic)");
  solve->add_option("--seed", sargs.seed, "Random seed (default: DCFAC_SEED or 1)");
  solve->add_option("--beta", sargs.beta, "nesterov | zero");
  solve->add_option("--time-limit", sargs.time_limit, "Wall-clock limit in seconds");
  solve->add_option("--out", sargs.out_path, "Write the report here instead of stdout");
  solve->add_flag("--emit-x", sargs.emit_x, "Include x and x_binary in the report");
  solve->add_flag("--trace", sargs.trace, "Record and emit per-iteration inner traces");
  solve->add_flag("--pretty", sargs.pretty, "Print a human summary instead of the report");
  solve->add_option("--index", sargs.index, "Problem index inside multi-problem files");

  BenchArgs bargs;
  CLI::App* bench = app.add_subcommand("bench", "Run every instance of a manifest");
  bench->add_option("--manifest", bargs.manifest_path, "Manifest file")->required();
  bench->add_option("--jobs", bargs.jobs, "Worker threads");
  bench->add_option("--out", bargs.out_path, "Write the CSV here instead of stdout");

  VerifyArgs vargs;
  CLI::App* verify = app.add_subcommand("verify", "Run a self-check suite");
  verify->add_option("--suite", vargs.suite, "tiny-exact | invariants | gradcheck")->required();
  verify->add_option("--trials", vargs.trials, "Trial count (0 = suite default)");
  verify->add_option("--seed", vargs.seed, "Random seed");

  GenArgs gargs;
  CLI::App* gen = app.add_subcommand("gen", "Generate a product instance");
  gen->add_option("--family", gargs.family, "product-random | product-maxcut")->required();
  gen->add_option("--l", gargs.l, "Block size (product-random)");
  gen->add_option("--seed", gargs.seed, "Random seed (default: DCFAC_SEED or 1)");
  gen->add_option("--w1", gargs.w1, "First edge-list graph (product-maxcut)");
  gen->add_option("--w2", gargs.w2, "Second edge-list graph (product-maxcut)");
  gen->add_option("--out", gargs.out_path, "Write the instance here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(sargs);
    if (bench->parsed()) return cmd_bench(bargs);
    if (verify->parsed()) return cmd_verify(vargs);
    if (gen->parsed()) return cmd_gen(gargs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
