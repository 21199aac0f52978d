// Command-line front end: database generation, inverse solves,
// certificate verification, benchmark table reproduction, and SDPA export.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ioc/iocp.hpp"
#include "ioc/sdpa.hpp"
#include "ioc/trajectory_bench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string problem = "exitnorm";  // lq|exitnorm|exittime|plp|brockett|custom
  std::string system_file;           // for custom problems
  std::string db_file;               // input database (solve/verify)
  int class_a = 1, class_b = 1;
  double class_c = 1.0;
  int deg_phi = 2;
  int pmin = 0, pmax = 0;  // hierarchy in phi half-degrees; 0 = single solve
  int n = 500;
  int s = 50;
  std::uint64_t seed = 42;
  std::string region = "ball";  // ball | annulus (exittime/plp)
  int plp_p = 0;
  std::string subcase = "mixed";  // brockett: planar | axis | mixed
  std::string out = "out";
  int ceiling_degphi = 8;
  int grid = 14;
  double tol = 1e-6;
  int jobs = 1;
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 5000;
  bool verbose = false;
};

int env_ceiling() {
  if (const char* v = std::getenv("IOC_SOLVER_CEILING_DEGPHI")) {
    try {
      return std::stoi(v);
    } catch (...) {
    }
  }
  return 8;
}

ioc::TrajectoryDatabase build_database(const RunConfig& cfg) {
  using namespace ioc;
  if (!cfg.db_file.empty()) return load_database(cfg.db_file);
  if (cfg.n < 1) throw CLI::ValidationError("--n must be >= 1");
  if (cfg.problem == "lq") return gen_lq(cfg.s, cfg.n, cfg.seed);
  if (cfg.problem == "exitnorm") return gen_exitnorm(cfg.n, cfg.seed, cfg.s);
  if (cfg.problem == "exittime" || cfg.problem == "plp") {
    std::optional<BasicSemialgebraicSet> region;
    if (cfg.region == "annulus") {
      ControlSystem sys = make_exit_system();
      region = annulus_set(sys.space, sys.space->state_ids(), 0.5, 1.0);
    } else if (cfg.region != "ball") {
      throw CLI::ValidationError("--region must be ball or annulus");
    }
    return cfg.problem == "plp"
               ? gen_plp(cfg.plp_p, cfg.n, cfg.seed, region, cfg.s)
               : gen_exittime(cfg.n, cfg.seed, region, cfg.s);
  }
  if (cfg.problem == "brockett") {
    if (cfg.subcase == "planar")
      return gen_brockett(cfg.n, cfg.seed, BrockettSubcase::kPlanar, cfg.s);
    if (cfg.subcase == "axis")
      return gen_brockett(cfg.n, cfg.seed, BrockettSubcase::kAxis, cfg.s);
    // Planar-weighted mixture: two thirds planar, one third axis.
    int planar = (2 * cfg.n + 2) / 3;
    return merge_databases(
        gen_brockett(planar, cfg.seed, BrockettSubcase::kPlanar, cfg.s),
        gen_brockett(cfg.n - planar, cfg.seed + 1, BrockettSubcase::kAxis,
                     cfg.s));
  }
  throw CLI::ValidationError("unknown problem id '" + cfg.problem + "'");
}

ioc::IocpOptions solver_options(const RunConfig& cfg) {
  ioc::IocpOptions opts;
  opts.solver.gap_tol = cfg.gap_tol;
  opts.solver.feas_tol = cfg.feas_tol;
  opts.solver.max_iter = cfg.max_iter;
  opts.solver.verbose = cfg.verbose;
  return opts;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  int r = static_cast<int>(j.size());
  int c = r ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd M(r, c);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < c; ++k) M(i, k) = j[i][k].get<double>();
  return M;
}

json verification_to_json(const ioc::VerificationReport& rep) {
  return json{{"pass", rep.pass},
              {"positivity_ok", rep.positivity_ok},
              {"boundary_ok", rep.boundary_ok},
              {"integral_ok", rep.integral_ok},
              {"normalization_ok", rep.normalization_ok},
              {"min_h", rep.min_h},
              {"boundary_min", rep.boundary_min},
              {"boundary_max", rep.boundary_max},
              {"integral_value", rep.integral_value},
              {"max_trajectory_integral", rep.max_trajectory_integral},
              {"trace_error", rep.trace_error},
              {"grid_size", rep.grid_size},
              {"detail", rep.detail}};
}

json bundle_to_json(const RunConfig& cfg, const ioc::TrajectoryDatabase& db,
                    const ioc::IocpSolution& sol,
                    const ioc::VerificationReport& rep,
                    std::optional<double> similarity) {
  json j;
  j["problem"] = db.problem;
  j["class"] = {{"a", sol.cls.a}, {"b", sol.cls.b}, {"C", sol.cls.C}};
  j["deg_phi"] = 2 * sol.phi_half_degree;
  j["epsilon"] = sol.epsilon;
  j["status"] = ioc::sdp::to_string(sol.sdp.status);
  j["L"] = ioc::to_string(sol.L);
  j["phi"] = ioc::to_string(sol.phi);
  j["gram_x"] = matrix_to_json(sol.gram_x);
  j["gram_u"] = matrix_to_json(sol.gram_u);
  j["solver"] = {{"iterations", sol.sdp.iterations},
                 {"gap", sol.sdp.gap},
                 {"max_violation", sol.sdp.max_violation},
                 {"dual_objective", sol.sdp.dual_objective}};
  j["verification"] = verification_to_json(rep);
  if (similarity) j["similarity_to_target"] = *similarity;
  j["config"] = {{"n", cfg.n},           {"s", cfg.s},
                 {"seed", cfg.seed},     {"region", cfg.region},
                 {"plp_p", cfg.plp_p},   {"subcase", cfg.subcase},
                 {"gap_tol", cfg.gap_tol}, {"feas_tol", cfg.feas_tol},
                 {"max_iter", cfg.max_iter}};
  return j;
}

std::string csv_row(const RunConfig& cfg, const ioc::IocpSolution& sol,
                    const ioc::VerificationReport& rep,
                    std::optional<double> similarity) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << cfg.problem << "," << sol.cls.a << "," << sol.cls.b << ","
     << 2 * sol.phi_half_degree << "," << cfg.n << "," << cfg.seed << ","
     << ioc::sdp::to_string(sol.sdp.status) << "," << num(sol.epsilon) << ","
     << (similarity ? num(*similarity) : std::string("")) << ","
     << (rep.pass ? "pass" : "fail");
  return os.str();
}

constexpr const char* kCsvHeader =
    "problem,class_a,class_b,deg_phi,n,seed,status,epsilon,similarity,"
    "verification";

int cmd_gen(const RunConfig& cfg) {
  ioc::TrajectoryDatabase db = build_database(cfg);
  ioc::DatabaseCheck check = ioc::validate_database(db);
  fs::create_directories(fs::path(cfg.out).parent_path().empty()
                             ? "."
                             : fs::path(cfg.out).parent_path().string());
  ioc::save_database(db, cfg.out);
  std::cout << "wrote " << cfg.out << ": " << db.trajectories.size()
            << " trajectories, " << db.total_samples() << " samples\n"
            << "invariants: " << (check.ok ? "ok" : check.message)
            << " (max dynamics residual " << check.max_dynamics_residual
            << ")\n";
  if (!check.ok) return 1;
  std::string csv = cfg.out + ".csv";
  std::ofstream os(csv);
  ioc::export_csv(db, os);
  std::cout << "wrote " << csv << "\n";
  return 0;
}

// Shared by solve/tables: one embedded run with verification.
struct SolveOutcome {
  ioc::IocpSolution sol;
  ioc::VerificationReport rep;
  std::optional<double> similarity;
};

SolveOutcome run_embedded(const RunConfig& cfg,
                          const ioc::TrajectoryDatabase& db, int deg_phi) {
  SolveOutcome out;
  ioc::LagrangianClass cls{cfg.class_a, cfg.class_b, cfg.class_c};
  out.sol = ioc::solve_iocp(db.system, db, cls, deg_phi / 2,
                            solver_options(cfg));
  out.rep = ioc::verify_certificate(db.system, db, out.sol, cfg.grid, cfg.tol);
  auto target = ioc::known_target(db.problem, cls, db.system.space);
  if (target && !out.sol.L.is_zero())
    out.similarity = ioc::compare_lagrangians(out.sol.L, *target).cosine;
  return out;
}

void export_problem(const RunConfig& cfg, const ioc::TrajectoryDatabase& db,
                    int deg_phi, const std::string& path) {
  ioc::LagrangianClass cls{cfg.class_a, cfg.class_b, cfg.class_c};
  ioc::IocpProgram prog =
      ioc::assemble(db.system, db, cls, deg_phi / 2, solver_options(cfg));
  ioc::sdpa::export_sdpa_file(prog.problem, path);
  int maxblk = 0;
  for (int s : prog.problem.block_sizes) maxblk = std::max(maxblk, s);
  std::cout << "deg(phi) = " << deg_phi << " exceeds the embedded ceiling ("
            << cfg.ceiling_degphi << "); exported SDPA problem to " << path
            << "\n  size: " << prog.problem.rows.size() << " rows, "
            << prog.problem.block_sizes.size() << " blocks (largest " << maxblk
            << "x" << maxblk << "), " << prog.problem.num_scalars
            << " free scalars\n  recommendation: solve with an external "
               "SDPA-format solver, or raise IOC_SOLVER_CEILING_DEGPHI\n";
}

int cmd_solve(const RunConfig& cfg) {
  ioc::TrajectoryDatabase db = build_database(cfg);
  fs::create_directories(cfg.out);
  if (cfg.deg_phi > cfg.ceiling_degphi && cfg.pmax == 0) {
    export_problem(cfg, db, cfg.deg_phi,
                   (fs::path(cfg.out) / "problem.dat-s").string());
    return 0;
  }
  std::vector<int> degrees;
  if (cfg.pmax > 0) {
    for (int p = cfg.pmin; p <= cfg.pmax; ++p) degrees.push_back(2 * p);
  } else {
    degrees.push_back(cfg.deg_phi);
  }

  std::ofstream csv(fs::path(cfg.out) / "summary.csv");
  csv << kCsvHeader << "\n";
  int rc = 0;
  std::vector<double> eps_levels;
  for (int deg : degrees) {
    if (deg > cfg.ceiling_degphi) {
      export_problem(cfg, db, deg,
                     (fs::path(cfg.out) / ("problem_deg" + std::to_string(deg) +
                                           ".dat-s"))
                         .string());
      continue;
    }
    SolveOutcome out = run_embedded(cfg, db, deg);
    json bundle = bundle_to_json(cfg, db, out.sol, out.rep, out.similarity);
    std::string name = degrees.size() == 1
                           ? "result.json"
                           : "result_deg" + std::to_string(deg) + ".json";
    std::ofstream(fs::path(cfg.out) / name) << bundle.dump(2) << "\n";
    csv << csv_row(cfg, out.sol, out.rep, out.similarity) << "\n";
    std::cout << "deg(phi) = " << deg << ": eps* = " << out.sol.epsilon
              << " (" << ioc::sdp::to_string(out.sol.sdp.status) << ", "
              << out.sol.sdp.iterations << " iterations)\n"
              << "  L = " << ioc::to_string(out.sol.L) << "\n";
    if (out.similarity)
      std::cout << "  similarity to known target: " << *out.similarity << "\n";
    std::cout << "  verification: " << (out.rep.pass ? "pass" : "FAIL")
              << (out.rep.pass ? "" : " " + out.rep.detail) << "\n";
    if (out.sol.sdp.status != ioc::sdp::SolveStatus::kOptimal) rc = 1;
    if (out.sol.sdp.status == ioc::sdp::SolveStatus::kOptimal)
      eps_levels.push_back(out.sol.epsilon);
  }
  for (size_t i = 1; i < eps_levels.size(); ++i)
    if (eps_levels[i] > eps_levels[i - 1] + 1e-7)
      std::cout << "warning: eps* not monotone across hierarchy levels\n";
  return rc;
}

int cmd_verify(const RunConfig& cfg, const std::string& bundle_path) {
  if (bundle_path.empty() || cfg.db_file.empty())
    throw CLI::ValidationError("verify needs --bundle and --db");
  std::ifstream is(bundle_path);
  if (!is) throw CLI::ValidationError("cannot open " + bundle_path);
  json bundle;
  is >> bundle;
  ioc::TrajectoryDatabase db = ioc::load_database(cfg.db_file);

  ioc::IocpSolution sol;
  sol.cls = {bundle.at("class").at("a").get<int>(),
             bundle.at("class").at("b").get<int>(),
             bundle.at("class").at("C").get<double>()};
  sol.phi_half_degree = bundle.at("deg_phi").get<int>() / 2;
  sol.epsilon = bundle.at("epsilon").get<double>();
  sol.L = ioc::parse_polynomial(bundle.at("L").get<std::string>(),
                                db.system.space);
  std::string phi_text = bundle.at("phi").get<std::string>();
  sol.phi = phi_text == "0" ? ioc::Polynomial::zero(db.system.space)
                            : ioc::parse_polynomial(phi_text, db.system.space);
  sol.gram_x = matrix_from_json(bundle.at("gram_x"));
  sol.gram_u = matrix_from_json(bundle.at("gram_u"));
  sol.sdp.status = ioc::sdp::SolveStatus::kOptimal;

  ioc::VerificationReport rep =
      ioc::verify_certificate(db.system, db, sol, cfg.grid, cfg.tol);
  std::cout << "positivity:    " << (rep.positivity_ok ? "ok" : "VIOLATED")
            << " (min H = " << rep.min_h << " over " << rep.grid_size
            << " grid points)\n"
            << "boundary:      " << (rep.boundary_ok ? "ok" : "VIOLATED")
            << " (phi(T,.) in [" << rep.boundary_min << ", "
            << rep.boundary_max << "])\n"
            << "integral:      " << (rep.integral_ok ? "ok" : "VIOLATED")
            << " (mean " << rep.integral_value << " vs eps " << sol.epsilon
            << ")\n"
            << "normalization: " << (rep.normalization_ok ? "ok" : "VIOLATED")
            << " (error " << rep.trace_error << ")\n";
  if (!rep.pass) {
    std::cout << "verification FAILED: " << rep.detail << "\n";
    if (!rep.min_h_point.empty() && !rep.positivity_ok) {
      std::cout << "violating point:";
      for (double v : rep.min_h_point) std::cout << " " << v;
      std::cout << "\n";
    }
    return 2;
  }
  std::cout << "verification passed\n";
  return 0;
}

struct TableRow {
  int table;
  int row;
  std::string problem;
  std::string region;  // exittime only
  int deg_phi;
  int a, b;
  double paper_eps;
  std::string paper_L;
};

int cmd_tables(RunConfig cfg) {
  const std::vector<TableRow> rows = {
      {1, 1, "lq", "", 4, 1, 1, 7e-2, "0.78x1^2+0.82x1x2+2.11x2^2+1.12u^2"},
      {1, 2, "lq", "", 10, 1, 0, 3.1e-1, "2.67x1^2-2.31x1x2+1.33x2^2"},
      {1, 3, "lq", "", 10, 1, 1, 4.5e-6, "2x1^2+0.5x1x2+x2^2+u^2"},
      {1, 4, "lq", "", 10, 2, 2, 4.5e-6, "2x1^2+0.5x1x2+x2^2+u^2"},
      {2, 1, "exitnorm", "", 2, 1, 1, 0.0, "x1^2+x2^2+u1^2+u2^2"},
      {2, 2, "exitnorm", "", 2, 2, 2, 0.0, "x1^2+x2^2+u1^2+u2^2"},
      {2, 3, "exitnorm", "", 4, 1, 1, 0.0, "x1^2+x2^2+u1^2+u2^2"},
      {2, 4, "exitnorm", "", 4, 2, 2, 0.0, "x1^2+x2^2+u1^2+u2^2"},
      {2, 5, "exitnorm", "", 2, 0, 1, 2e-3, "1.97+0.54(u1^2+u2^2)"},
      {3, 1, "exittime", "ball", 4, 0, 1, 1e-1, "0.31+0.34u1^2+0.36u2^2"},
      {3, 2, "exittime", "ball", 12, 0, 1, 2e-2, "0.327+0.335u1^2+0.337u2^2"},
      {3, 3, "exittime", "annulus", 12, 0, 1, 2e-4,
       "0.338+0.326u1^2+0.336u2^2"},
      {3, 4, "exittime", "ball", 2, 1, 1, 4.5e-2,
       "0.337u1^2+0.339u2^2+0.741x1^2+0.738x2^2"},
      {3, 5, "exittime", "ball", 12, 1, 1, 3e-4, "x1^2+x2^2"},
      {3, 6, "exittime", "ball", 4, 0, 2, 0.0, "(1-u1^2-u2^2)^2"},
      {3, 7, "exittime", "ball", 4, 2, 2, 0.0, "(1-u1^2-u2^2)^2"},
      {4, 1, "brockett", "", 10, 0, 1, 8.31e-2, "0.313+0.339u1^2+0.348u2^2"},
      {4, 2, "brockett", "", 14, 0, 1, 4.36e-2, "0.323+0.338u1^2+0.339u2^2"},
      {4, 3, "brockett", "", 10, 0, 2, 0.0, "(1-u1^2-u2^2)^2"},
      {4, 4, "brockett", "", 10, 2, 2, 0.0, "(1-u1^2-u2^2)^2"},
      {4, 5, "brockett", "", 12, 1, 1, 1e-1, "m1(x)'C1x m1(x)+0.31u1^2+..."},
  };
  fs::create_directories(cfg.out);

  auto run_row = [&](const TableRow& row) -> std::string {
    RunConfig rc = cfg;
    rc.problem = row.problem;
    rc.class_a = row.a;
    rc.class_b = row.b;
    rc.deg_phi = row.deg_phi;
    rc.region = row.region.empty() ? "ball" : row.region;
    std::ostringstream os;
    char num[64];
    auto fmt = [&](double v) {
      std::snprintf(num, sizeof(num), "%.6g", v);
      return std::string(num);
    };
    os << row.table << "," << row.row << "," << row.problem << ","
       << rc.region << "," << row.deg_phi << ",L" << row.a << row.b << ",";
    try {
      ioc::TrajectoryDatabase db = build_database(rc);
      if (row.deg_phi > rc.ceiling_degphi) {
        std::string path =
            (fs::path(cfg.out) / ("table" + std::to_string(row.table) +
                                  "_row" + std::to_string(row.row) + ".dat-s"))
                .string();
        ioc::LagrangianClass cls{rc.class_a, rc.class_b, rc.class_c};
        ioc::IocpProgram prog = ioc::assemble(db.system, db, cls,
                                              row.deg_phi / 2,
                                              solver_options(rc));
        ioc::sdpa::export_sdpa_file(prog.problem, path);
        os << "export," << fmt(row.paper_eps) << ",,,," << path;
      } else {
        SolveOutcome out = run_embedded(rc, db, row.deg_phi);
        os << "embedded," << fmt(row.paper_eps) << "," << fmt(out.sol.epsilon)
           << "," << (out.similarity ? fmt(*out.similarity) : "") << ","
           << ioc::sdp::to_string(out.sol.sdp.status) << ","
           << "\"" << ioc::to_string(out.sol.L) << "\"";
      }
    } catch (const std::exception& e) {
      os << "error,,,,," << e.what();
    }
    return os.str();
  };

  std::vector<std::string> results(rows.size());
  if (cfg.jobs > 1) {
    std::vector<std::future<std::string>> futures;
    for (const auto& row : rows)
      futures.push_back(std::async(std::launch::async, run_row, row));
    for (size_t i = 0; i < rows.size(); ++i) results[i] = futures[i].get();
  } else {
    for (size_t i = 0; i < rows.size(); ++i) results[i] = run_row(rows[i]);
  }

  for (int t = 1; t <= 4; ++t) {
    std::string path =
        (fs::path(cfg.out) / ("table" + std::to_string(t) + ".csv")).string();
    std::ofstream os(path);
    os << "table,row,problem,region,deg_phi,class,mode,paper_eps,eps,"
          "similarity,status,result\n";
    for (size_t i = 0; i < rows.size(); ++i)
      if (rows[i].table == t) os << results[i] << "\n";
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int cmd_export(const RunConfig& cfg) {
  ioc::TrajectoryDatabase db = build_database(cfg);
  fs::create_directories(fs::path(cfg.out).parent_path().empty()
                             ? "."
                             : fs::path(cfg.out).parent_path().string());
  ioc::LagrangianClass cls{cfg.class_a, cfg.class_b, cfg.class_c};
  ioc::IocpProgram prog = ioc::assemble(db.system, db, cls, cfg.deg_phi / 2,
                                        solver_options(cfg));
  ioc::sdpa::export_sdpa_file(prog.problem, cfg.out);
  std::cout << "wrote " << cfg.out << " (" << prog.problem.rows.size()
            << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inverse optimal control via relaxed HJB certificates"};
  app.set_config("--config", "", "read options from an INI file");
  RunConfig cfg;
  cfg.ceiling_degphi = env_ceiling();
  bool dump_config = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--problem", cfg.problem,
                    "lq|exitnorm|exittime|plp|brockett|custom");
    cmd->add_option("--system", cfg.system_file, "custom system JSON");
    cmd->add_option("--db", cfg.db_file, "database JSON file");
    cmd->add_option("--n", cfg.n, "trajectory count");
    cmd->add_option("--s", cfg.s, "samples per trajectory");
    cmd->add_option("--seed", cfg.seed, "RNG seed (all randomness)");
    cmd->add_option("--region", cfg.region, "sampling region: ball|annulus");
    cmd->add_option("--p", cfg.plp_p, "p for the plp family");
    cmd->add_option("--subcase", cfg.subcase,
                    "brockett subcase: planar|axis|mixed");
    cmd->add_option("--out", cfg.out, "output path");
    cmd->add_flag("--dump-config", dump_config, "print the resolved config");
    cmd->add_flag("--verbose", cfg.verbose, "solver iteration log to stderr");
  };
  auto add_solver = [&](CLI::App* cmd) {
    cmd->add_option("--class", [&cfg](const std::vector<std::string>& vals) {
          int a, b;
          if (std::sscanf(vals[0].c_str(), "%d,%d", &a, &b) != 2) return false;
          cfg.class_a = a;
          cfg.class_b = b;
          return true;
        },
        "Lagrangian class a,b (e.g. 1,1)");
    cmd->add_option("--normc", cfg.class_c, "trace normalization constant C");
    cmd->add_option("--degphi", cfg.deg_phi, "degree of phi (even)");
    cmd->add_option("--pmin", cfg.pmin, "hierarchy start (phi half-degree)");
    cmd->add_option("--pmax", cfg.pmax, "hierarchy end (phi half-degree)");
    cmd->add_option("--ceiling", cfg.ceiling_degphi,
                    "embedded solver ceiling on deg(phi)");
    cmd->add_option("--grid", cfg.grid, "verification grid per axis");
    cmd->add_option("--tol", cfg.tol, "verification tolerance");
    cmd->add_option("--gap-tol", cfg.gap_tol, "solver duality gap tolerance");
    cmd->add_option("--feas-tol", cfg.feas_tol, "solver feasibility tolerance");
    cmd->add_option("--max-iter", cfg.max_iter, "solver iteration cap");
    cmd->add_option("--jobs", cfg.jobs, "parallel rows (tables)");
  };

  CLI::App* gen = app.add_subcommand("gen", "generate a trajectory database");
  add_common(gen);
  CLI::App* solve = app.add_subcommand("solve", "assemble and solve the IOCP");
  add_common(solve);
  add_solver(solve);
  CLI::App* verify =
      app.add_subcommand("verify", "re-verify a result bundle");
  std::string bundle_path;
  verify->add_option("--bundle", bundle_path, "result JSON");
  add_common(verify);
  add_solver(verify);
  CLI::App* tables =
      app.add_subcommand("tables", "reproduce the four benchmark tables");
  add_common(tables);
  add_solver(tables);
  CLI::App* exp = app.add_subcommand("export-sdpa", "write the SDPA problem");
  add_common(exp);
  add_solver(exp);
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  if (dump_config) {
    std::cout << "problem=" << cfg.problem << " class=" << cfg.class_a << ","
              << cfg.class_b << " degphi=" << cfg.deg_phi << " n=" << cfg.n
              << " s=" << cfg.s << " seed=" << cfg.seed
              << " region=" << cfg.region << " subcase=" << cfg.subcase
              << " ceiling=" << cfg.ceiling_degphi << " out=" << cfg.out
              << "\n";
  }
  try {
    if (gen->parsed()) return cmd_gen(cfg);
    if (solve->parsed()) return cmd_solve(cfg);
    if (verify->parsed()) return cmd_verify(cfg, bundle_path);
    if (tables->parsed()) return cmd_tables(cfg);
    if (exp->parsed()) return cmd_export(cfg);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
