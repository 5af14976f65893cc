// Acceptance gate: runs every promised behavior of the solver end to end and
// prints one PASS/FAIL/SKIP line per criterion. Exits nonzero if any line
// fails. Large public benchmark graphs are looked up under DCFAC_GSET_DIR
// (or the repo's data/gset directory); when they are absent those criteria
// are reported as SKIP and clearly-labeled synthetic stand-ins of the same
// size run instead.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcfac/dc_core.hpp"
#include "dcfac/driver.hpp"
#include "dcfac/instances.hpp"
#include "dcfac/model.hpp"
#include "dcfac/oracle.hpp"
#include "dcfac/rng.hpp"

using namespace dcfac;

namespace {

enum class Status { Pass, Fail, Skip };

struct Line {
  std::string id;
  Status status = Status::Pass;
  std::string text;
};

std::vector<Line> g_lines;

void report(const std::string& id, Status st, const std::string& text) {
  g_lines.push_back({id, st, text});
  const char* tag = st == Status::Pass ? "PASS" : st == Status::Fail ? "FAIL" : "SKIP";
  std::printf("[%3s] %s  %s\n", id.c_str(), tag, text.c_str());
  std::fflush(stdout);
}

// Every solve run by any criterion lands here so the cross-cutting gates
// (infeasibility at normal exits, rounding stability) see all of them.
struct Observed {
  std::string context;
  double infeas_inf = 0.0;
  double infeas_two = 0.0;
  double obj = 0.0;
  double obj_rounded = 0.0;
  bool exited_normally = false;
};
std::vector<Observed> g_observed;

void observe(const std::string& context, const SolveReport& rep) {
  g_observed.push_back(
      {context, rep.infeas_inf, rep.infeas_two, rep.obj, rep.obj_rounded, rep.exited_normally});
}

Instance random_ubqp(int n, std::uint64_t seed, double scale, const std::string& name) {
  Rng rng(seed);
  SymBuilder b(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = rng.uniform(-scale, scale);
      if (i == j) b.add_raw(i, i, v);
      else b.add(i, j, v);
    }
  auto [obj, inst] = build_ubqp(b.build(), name);
  (void)obj;
  return inst;
}

/// Toroidal grid graph with deterministic +-1 weights: same family and sizes
/// as the public 800- and 5000-node benchmark graphs.
EdgeList torus_graph(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  EdgeList g;
  g.n = rows * cols;
  auto id = [&](int r, int c) { return ((r + rows) % rows) * cols + (c + cols) % cols; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      int a = id(r, c);
      for (int b : {id(r + 1, c), id(r, c + 1)}) {
        double w = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        g.edges.push_back({std::min(a, b), std::max(a, b), w});
      }
    }
  return g;
}

double cut_of(const EdgeList& g, const std::vector<double>& x) {
  double cut = 0.0;
  for (const auto& e : g.edges) cut += e.v * 0.5 * (1.0 - x[e.i] * x[e.j]);
  return cut;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_tiny_exact() {
  int exact = 0;
  int feasible = 0;
  double max_time = 0.0;
  const int trials = 30;
  for (int i = 0; i < trials; ++i) {
    int n = 4 + i % 9;  // 4..12
    Instance inst = random_ubqp(n, 1000 + i, 5.0, "tiny-" + std::to_string(i));
    PenaltyConfig cfg;
    cfg.seed = 1;
    SolveReport rep = solve(inst.objective, inst, cfg);
    observe("tiny-exact", rep);
    max_time = std::max(max_time, rep.wall_time_s);

    // x_binary lives in solver coordinates: n + 1 entries for the
    // homogenized quadratic, all exactly +-1 when rounding succeeded.
    bool ok_feas = rep.x_binary.size() == static_cast<std::size_t>(rep.p);
    for (double s : rep.x_binary) ok_feas = ok_feas && std::abs(s) == 1.0;
    if (ok_feas) ++feasible;

    BruteForceResult bf = brute_force(inst);
    if (ok_feas && std::abs(rep.obj_rounded - bf.opt_value) <= 1e-6) ++exact;
  }
  std::ostringstream ss;
  ss << "tiny exact suite: " << feasible << "/" << trials << " feasible, " << exact << "/"
     << trials << " at the brute-force optimum (need >= 27), max solve "
     << fmt("%.3f", max_time) << " s (limit 1 s)";
  bool ok = feasible == trials && exact >= 27 && max_time < 1.0;
  report("1", ok ? Status::Pass : Status::Fail, ss.str());
}

void criterion_descent_invariants() {
  int violations = 0;
  int traces = 0;
  std::string first_detail;
  for (int i = 0; i < 20; ++i) {
    int n = 10 + 2 * i;  // 10..48
    Instance inst = random_ubqp(n, 2000 + i, 2.0, "descent-" + std::to_string(i));
    PenaltyConfig cfg;
    cfg.seed = 1;
    cfg.beta_mode = BetaMode::Zero;
    cfg.record_inner_traces = true;
    SolveReport rep = solve(inst.objective, inst, cfg);
    observe("descent", rep);
    for (std::size_t l = 0; l < rep.inner_traces.size(); ++l) {
      ++traces;
      CertificateReport cr = check_descent(rep.inner_traces[l], rep.rho_trace[l]);
      if (!cr.ok) {
        ++violations;
        if (first_detail.empty())
          first_detail = " first: instance " + std::to_string(i) + " outer " +
                         std::to_string(l) + ": " + cr.detail;
      }
    }
  }
  std::ostringstream ss;
  ss << "descent invariants (extrapolation off): " << violations << " violations across "
     << traces << " inner traces (zero allowed)" << first_detail;
  report("5", violations == 0 ? Status::Pass : Status::Fail, ss.str());
}

void criterion_gamma_certificates() {
  Rng rng(606);
  int failures = 0;
  std::string first_detail;
  for (int i = 0; i < 100; ++i) {
    int m = rng.uniform_int(2, 10);
    int p = rng.uniform_int(m + 1, 40);
    FactorMatrix v = init_factor(m, p, rng.next_u64());
    CertificateReport cr = check_gamma(v.mat, 1e-9);
    if (!cr.ok) {
      ++failures;
      if (first_detail.empty()) first_detail = " first: " + cr.detail;
    }
  }
  std::ostringstream ss;
  ss << "spectral subgradient certificates: " << failures
     << " failures across 100 random factors (zero allowed)" << first_detail;
  report("6", failures == 0 ? Status::Pass : Status::Fail, ss.str());
}

void criterion_gradient_oracle() {
  double worst = 0.0;
  Instance lin = random_ubqp(12, 7070, 2.0, "grad-lin");
  Rng rng(71);
  for (int i = 0; i < 20; ++i) {
    FactorMatrix v = init_factor(5, lin.objective.p, rng.next_u64());
    worst = std::max(worst, fd_gradient_check(lin.objective, v.mat, 1e-6));
  }
  auto [prod, pinst] = realize(gen_product_random(5, 7171));
  (void)pinst;
  for (int i = 0; i < 20; ++i) {
    FactorMatrix v = init_factor(5, prod.p, rng.next_u64());
    worst = std::max(worst, fd_gradient_check(prod, v.mat, 1e-6));
  }
  std::ostringstream ss;
  ss << "finite-difference gradient battery: max relative error " << fmt("%.3e", worst)
     << " over 20 points per objective kind (limit 1e-5)";
  report("7", worst <= 1e-5 ? Status::Pass : Status::Fail, ss.str());
}

void criterion_product_instances() {
  int equal = 0;
  bool never_above = true;
  for (int i = 0; i < 20; ++i) {
    auto [obj, inst] = realize(gen_product_random(2, 3000 + i));
    PenaltyConfig cfg;
    cfg.seed = 1;
    SolveReport rep = solve(obj, inst, cfg);
    observe("product-l2", rep);
    BruteForceResult bf = brute_force(inst);
    if (rep.obj > bf.opt_value + 1e-6) never_above = false;
    if (std::abs(rep.obj - bf.opt_value) <= 1e-6) ++equal;
  }

  auto [big_obj, big_inst] = realize(gen_product_random(100, 4242));
  PenaltyConfig big_cfg;
  big_cfg.seed = 1;
  big_cfg.time_limit_s = 150.0;
  SolveReport big = solve(big_obj, big_inst, big_cfg);
  observe("product-l100", big);

  std::ostringstream ss;
  ss << "product instances: l=2 objective never above optimum: "
     << (never_above ? "yes" : "NO") << ", exact in " << equal
     << "/20 (need >= 16); l=100 solve " << fmt("%.1f", big.wall_time_s)
     << " s (limit 120), exit " << big.exit_reason;
  bool ok = never_above && equal >= 16 && big.wall_time_s <= 120.0 && big.exited_normally;
  report("8", ok ? Status::Pass : Status::Fail, ss.str());
}

std::optional<std::string> gset_dir() {
  if (const char* env = std::getenv("DCFAC_GSET_DIR"); env != nullptr && *env != '\0')
    return std::string(env);
#ifdef DCFAC_DATA_DIR
  std::string repo = std::string(DCFAC_DATA_DIR) + "/gset";
  if (std::ifstream(repo + "/G11").good()) return repo;
#endif
  return std::nullopt;
}

struct GsetCase {
  const char* file;
  double bval;
  double gap_limit;
};

void criterion_gset_desk(const std::optional<std::string>& dir) {
  const GsetCase cases[] = {{"G11", 564.0, 3.0}, {"G14", 3064.0, 2.0}, {"G43", 6660.0, 1.5}};
  if (!dir) {
    report("3", Status::Skip,
           "public 800-1000 node benchmark graphs not found (set DCFAC_GSET_DIR or place "
           "G11/G14/G43 under data/gset); sized stand-in runs as line 3x");
    EdgeList g = torus_graph(20, 40, 808);
    SymBuilder b(g.n);
    for (const auto& e : g.edges) b.add(e.i, e.j, e.v);
    auto [obj, inst] = build_maxcut(b.build(), "torus-800");
    PenaltyConfig cfg;
    cfg.seed = 1;
    cfg.time_limit_s = 150.0;
    SolveReport rep = solve(obj, inst, cfg);
    observe("torus-800", rep);
    double direct_cut = cut_of(g, rep.x_binary);
    bool ok = rep.exited_normally && rep.wall_time_s <= 120.0 && rep.infeas_inf <= 1e-7 &&
              std::abs(direct_cut - rep.obj_rounded) <= 1e-6;
    std::ostringstream ss;
    ss << "synthetic 800-node torus (no published best value, so no gap gate): exit "
       << rep.exit_reason << " in " << fmt("%.1f", rep.wall_time_s)
       << " s (limit 120), infeas " << fmt("%.1e", rep.infeas_inf)
       << " (limit 1e-7), rounded cut " << fmt("%.1f", rep.obj_rounded)
       << " recomputed independently: " << (std::abs(direct_cut - rep.obj_rounded) <= 1e-6
                                                ? "match"
                                                : "MISMATCH");
    report("3x", ok ? Status::Pass : Status::Fail, ss.str());
    return;
  }

  bool all_ok = true;
  std::ostringstream ss;
  ss << "public desk-scale graphs:";
  for (const GsetCase& c : cases) {
    EdgeList g = parse_edgelist(read_text_file(*dir + "/" + c.file));
    SymBuilder b(g.n);
    for (const auto& e : g.edges) b.add(e.i, e.j, e.v);
    auto [obj, inst] = build_maxcut(b.build(), c.file);
    PenaltyConfig cfg;
    cfg.seed = 1;
    cfg.bval = c.bval;
    cfg.time_limit_s = 150.0;
    SolveReport rep = solve(obj, inst, cfg);
    observe(c.file, rep);
    // gap_percent is signed, (obj - bval) / |bval|; the criterion bounds the
    // shortfall below the published best, so exceeding it is a pass too.
    double gap = rep.gap_percent ? std::max(0.0, -*rep.gap_percent) : 1e300;
    bool ok = rep.exited_normally && rep.wall_time_s <= 120.0 && gap <= c.gap_limit &&
              rep.infeas_inf <= 1e-7;
    all_ok = all_ok && ok;
    ss << " " << c.file << ": gap " << fmt("%.3f", gap) << "% (limit "
       << fmt("%.1f", c.gap_limit) << "), " << fmt("%.1f", rep.wall_time_s) << " s, infeas "
       << fmt("%.1e", rep.infeas_inf) << ";";
  }
  report("3", all_ok ? Status::Pass : Status::Fail, ss.str());
}

void criterion_gset_scale(const std::optional<std::string>& dir) {
  if (!dir || !std::ifstream(*dir + "/G55").good()) {
    report("4", Status::Skip,
           "public 5000-node benchmark graph not found (set DCFAC_GSET_DIR or place G55 "
           "under data/gset); sized stand-in runs as line 4x");
    EdgeList g = torus_graph(50, 100, 5555);
    SymBuilder b(g.n);
    for (const auto& e : g.edges) b.add(e.i, e.j, e.v);
    auto [obj, inst] = build_maxcut(b.build(), "torus-5000");
    PenaltyConfig cfg;
    cfg.seed = 1;
    cfg.time_limit_s = 650.0;
    SolveReport rep = solve(obj, inst, cfg);
    observe("torus-5000", rep);
    double direct_cut = cut_of(g, rep.x_binary);
    bool ok = rep.exited_normally && rep.wall_time_s <= 600.0 &&
              std::abs(direct_cut - rep.obj_rounded) <= 1e-6;
    std::ostringstream ss;
    ss << "synthetic 5000-node torus (no published best value, so no gap gate): exit "
       << rep.exit_reason << " in " << fmt("%.1f", rep.wall_time_s)
       << " s (limit 600), infeas " << fmt("%.1e", rep.infeas_inf) << ", rounded cut "
       << fmt("%.1f", rep.obj_rounded) << " recomputed independently: "
       << (std::abs(direct_cut - rep.obj_rounded) <= 1e-6 ? "match" : "MISMATCH");
    report("4x", ok ? Status::Pass : Status::Fail, ss.str());
    return;
  }

  EdgeList g = parse_edgelist(read_text_file(*dir + "/G55"));
  SymBuilder b(g.n);
  for (const auto& e : g.edges) b.add(e.i, e.j, e.v);
  auto [obj, inst] = build_maxcut(b.build(), "G55");
  PenaltyConfig cfg;
  cfg.seed = 1;
  cfg.bval = 10299.0;
  cfg.time_limit_s = 650.0;
  SolveReport rep = solve(obj, inst, cfg);
  observe("G55", rep);
  double gap = rep.gap_percent ? std::max(0.0, -*rep.gap_percent) : 1e300;
  bool ok = rep.exited_normally && rep.wall_time_s <= 600.0 && gap <= 3.0;
  std::ostringstream ss;
  ss << "5000-node graph: exit " << rep.exit_reason << " in " << fmt("%.1f", rep.wall_time_s)
     << " s (limit 600), gap " << fmt("%.3f", gap) << "% (limit 3)";
  report("4", ok ? Status::Pass : Status::Fail, ss.str());
}

void criterion_determinism() {
  Instance inst = random_ubqp(16, 9090, 3.0, "determinism");
  PenaltyConfig cfg;
  cfg.seed = 11;
  SolveReport a = solve(inst.objective, inst, cfg);
  SolveReport b = solve(inst.objective, inst, cfg);
  observe("determinism", a);

  bool reports_equal = a.x == b.x && a.x_binary == b.x_binary && a.obj == b.obj &&
                       a.obj_rounded == b.obj_rounded && a.f_final == b.f_final &&
                       a.rho_trace == b.rho_trace && a.specnorm_trace == b.specnorm_trace &&
                       a.outer_iters == b.outer_iters && a.inner_iters == b.inner_iters &&
                       a.sigma1 == b.sigma1 && a.bound_term == b.bound_term &&
                       a.infeas_inf == b.infeas_inf && a.infeas_two == b.infeas_two;

  // Benchmark CSV determinism, serial vs parallel, through the real binary.
  bool csv_equal = false;
  std::string csv_note;
#ifdef DCFAC_BIN_PATH
  auto run = [](const std::string& args) -> int {
    int status = std::system(args.c_str());
    return (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  };
  auto slurp = [](const char* path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto normalize = [](const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (!header) {
        int commas = 0;
        std::size_t t0 = 0, t1 = 0;
        for (std::size_t i = 0; i < line.size(); ++i)
          if (line[i] == ',') {
            ++commas;
            if (commas == 5) t0 = i + 1;
            if (commas == 6) t1 = i;
          }
        if (t1 > t0) line = line.substr(0, t0) + "T" + line.substr(t1);
      }
      header = false;
      out << line << "\n";
    }
    return out.str();
  };
  {
    std::ofstream e2("acc_edge2.txt");
    e2 << "2 1\n1 2 1\n";
    std::ofstream t3("acc_tri3.txt");
    t3 << "3 3\n1 2 1\n2 3 1\n1 3 1\n";
    std::ofstream mf("acc_bench.mf");
    mf << "acc_edge2.txt, edgelist, maxcut, 1\n"
       << "acc_tri3.txt, edgelist, maxcut, 2\n"
       << "acc_edge2.txt, edgelist, maxcut\n";
  }
  std::string bin = "\"" DCFAC_BIN_PATH "\"";
  int r1 = run(bin + " bench --manifest acc_bench.mf --jobs 1 --out acc_a.csv 2> /dev/null");
  int r2 = run(bin + " bench --manifest acc_bench.mf --jobs 8 --out acc_b.csv 2> /dev/null");
  if (r1 == 0 && r2 == 0) {
    csv_equal = normalize(slurp("acc_a.csv")) == normalize(slurp("acc_b.csv"));
    csv_note = csv_equal ? "serial and 8-way CSV identical up to wall time"
                         : "serial vs parallel CSV DIFFER";
  } else {
    csv_note = "bench runs failed";
  }
  for (const char* f : {"acc_edge2.txt", "acc_tri3.txt", "acc_bench.mf", "acc_a.csv",
                        "acc_b.csv"})
    std::remove(f);
#else
  csv_note = "bench binary unavailable";
#endif

  std::ostringstream ss;
  ss << "determinism: repeated solve reports " << (reports_equal ? "identical" : "DIFFER")
     << " in every field except wall time; " << csv_note;
  report("10", reports_equal && csv_equal ? Status::Pass : Status::Fail, ss.str());
}

void criterion_infeasibility_registry() {
  double worst = 0.0;
  int normal = 0;
  bool ok = true;
  std::string offender;
  for (const Observed& o : g_observed) {
    if (!o.exited_normally) continue;
    ++normal;
    worst = std::max(worst, o.infeas_two);
    if (o.infeas_two > 1e-8 && offender.empty()) {
      ok = false;
      offender = " first offender: " + o.context;
    }
  }
  std::ostringstream ss;
  ss << "infeasibility bound at every normal exit: " << normal << " exits observed, max "
     << fmt("%.3e", worst) << " (bound 1e-8, zero slack)" << offender;
  report("2", ok ? Status::Pass : Status::Fail, ss.str());
}

void criterion_rounding_registry() {
  int near = 0;
  bool ok = true;
  double worst = 0.0;
  std::string offender;
  for (const Observed& o : g_observed) {
    if (o.infeas_inf > 1e-6) continue;
    ++near;
    double err = std::abs(o.obj_rounded - o.obj) / (1.0 + std::abs(o.obj));
    worst = std::max(worst, err);
    if (err > 1e-4 && offender.empty()) {
      ok = false;
      offender = " first offender: " + o.context;
    }
  }
  std::ostringstream ss;
  ss << "rounding stability: " << near << " near-feasible reports, max relative change "
     << fmt("%.3e", worst) << " (limit 1e-4)" << offender;
  report("9", ok ? Status::Pass : Status::Fail, ss.str());
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  std::optional<std::string> dir = gset_dir();

  criterion_tiny_exact();
  criterion_descent_invariants();
  criterion_gamma_certificates();
  criterion_gradient_oracle();
  criterion_product_instances();
  criterion_gset_desk(dir);
  criterion_gset_scale(dir);
  criterion_determinism();

  // Cross-cutting gates evaluated over everything observed above.
  criterion_infeasibility_registry();
  criterion_rounding_registry();

  int pass = 0, fail = 0, skip = 0;
  for (const Line& l : g_lines) {
    if (l.status == Status::Pass) ++pass;
    else if (l.status == Status::Fail) ++fail;
    else ++skip;
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("ACCEPTANCE: %s (%d pass, %d fail, %d skip) in %.1f s\n",
              fail == 0 ? "PASS" : "FAIL", pass, fail, skip, secs);
  return fail == 0 ? 0 : 1;
}
