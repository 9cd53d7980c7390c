#include "fracprec/runner.hpp"

#include "fracprec/solvers.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fracprec {

const char* const kCsvHeader =
    "problem,mesh_family,level,h,pairing,bc,precond,mu,K,alpha,dofs_per_field,"
    "iterations,converged,cond,lambda_min_abs,lambda_max_abs,seed,seconds";

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }
std::string opt_bool(const std::optional<bool>& v) { return v ? (*v ? "1" : "0") : ""; }
std::string opt_dbl(const std::optional<double>& v) { return v ? fmt_double(*v) : ""; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double mesh_h(const Mesh2D& mesh) {
  double h = 0;
  for (const auto& cell : mesh.cells)
    for (int e = 0; e < 3; ++e) {
      const auto& p = mesh.vertices[cell[e]];
      const auto& q = mesh.vertices[cell[(e + 1) % 3]];
      h = std::max(h, std::hypot(p[0] - q[0], p[1] - q[1]));
    }
  return h;
}

}  // namespace

std::string to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const auto& r : records) {
    os << r.problem << ',' << r.mesh_family << ',' << r.level << ',' << fmt_double(r.h) << ','
       << r.pairing << ',' << r.bc << ',' << r.precond << ',' << fmt_double(r.mu) << ','
       << fmt_double(r.k) << ',' << fmt_double(r.alpha) << ',' << r.dofs_per_field << ','
       << opt_int(r.iterations) << ',' << opt_bool(r.converged) << ',' << opt_dbl(r.cond) << ','
       << opt_dbl(r.lambda_min_abs) << ',' << opt_dbl(r.lambda_max_abs) << ',' << r.seed << ','
       << fmt_double(r.seconds) << "\n";
  }
  return os.str();
}

void write_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << to_csv(records);
}

std::vector<RunRecord> read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open csv file: " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty csv file: " + path);
  if (line != kCsvHeader) throw std::runtime_error("unexpected csv header in " + path);
  std::vector<RunRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 18) throw std::runtime_error("malformed csv row in " + path);
    RunRecord r;
    r.problem = cells[0];
    r.mesh_family = cells[1];
    r.level = std::stoi(cells[2]);
    r.h = std::stod(cells[3]);
    r.pairing = cells[4];
    r.bc = cells[5];
    r.precond = cells[6];
    r.mu = std::stod(cells[7]);
    r.k = std::stod(cells[8]);
    r.alpha = std::stod(cells[9]);
    r.dofs_per_field = cells[10];
    if (!cells[11].empty()) r.iterations = std::stoi(cells[11]);
    if (!cells[12].empty()) r.converged = cells[12] == "1";
    if (!cells[13].empty()) r.cond = std::stod(cells[13]);
    if (!cells[14].empty()) r.lambda_min_abs = std::stod(cells[14]);
    if (!cells[15].empty()) r.lambda_max_abs = std::stod(cells[15]);
    r.seed = std::stoul(cells[16]);
    r.seconds = std::stod(cells[17]);
    out.push_back(r);
  }
  return out;
}

BlockSystem build_from_config(const ExperimentConfig& cfg, const std::string& pairing,
                              const std::string& precond, int level, const ParameterSet& params) {
  PrecondVariant pv = PrecondVariant::parse(precond);
  if (cfg.problem == "darcy-stokes") {
    DarcyStokesOptions opt;
    opt.params = params;
    opt.precond = pv;
    opt.level = level;
    return build_darcy_stokes(opt);
  }
  std::shared_ptr<const Mesh2D> mesh;
  double h;
  if (cfg.mesh_family == "us") {
    int n = 1 << level;
    mesh = std::make_shared<const Mesh2D>(generate_crossed(n, n, {0, 0, 1, 1}));
    h = 1.0 / n;
  } else {
    std::string path = cfg.mesh_dir + "/" + cfg.mesh_family + "_l" + std::to_string(level) + ".msh";
    mesh = std::make_shared<const Mesh2D>(read_mesh(path));
    h = mesh_h(*mesh);
  }
  ScalarProblemOptions opt;
  opt.pairing = pairing;
  opt.bc = cfg.bc;
  opt.precond = pv;
  opt.mesh_family = cfg.mesh_family;
  opt.level = level;
  opt.h = h;
  std::string bc_resolved = cfg.bc;
  if (bc_resolved.empty()) bc_resolved = cfg.problem == "l2-trace" ? "none" : "neumann-intersect";
  auto tagged =
      std::make_shared<const Mesh2D>(tag_scalar_problem_boundary(*mesh, cfg.problem, bc_resolved));
  opt.bc = bc_resolved;
  if (cfg.problem == "l2-trace") return build_l2_trace(tagged, opt);
  return build_babuska(tagged, opt);
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  struct Combo {
    std::string pairing, precond;
    int level;
    ParameterSet params;
  };
  std::vector<Combo> combos;
  std::vector<std::string> pairings =
      cfg.problem == "darcy-stokes" ? std::vector<std::string>{""} : cfg.pairings;
  for (const auto& pairing : pairings)
    for (const auto& precond : cfg.preconds)
      for (int level : cfg.levels)
        for (double mu : cfg.mus)
          for (double k : cfg.ks)
            for (double alpha : cfg.alphas)
              combos.push_back({pairing, precond, level, ParameterSet{mu, k, alpha}});

  std::vector<RunRecord> records(combos.size());
  std::vector<std::string> errors(combos.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const Combo& cb = combos[i];
    auto t0 = std::chrono::steady_clock::now();
    try {
      BlockSystem sys = build_from_config(cfg, cb.pairing, cb.precond, cb.level, cb.params);
      RunRecord r;
      r.problem = sys.problem;
      r.mesh_family = sys.mesh_family;
      r.level = sys.level;
      r.h = sys.h;
      r.pairing = sys.pairing;
      r.bc = sys.bc;
      r.precond = sys.precond;
      r.mu = cb.params.mu;
      r.k = cb.params.k;
      r.alpha = cb.params.alpha;
      r.dofs_per_field = sys.dofs_per_field();
      r.seed = cfg.seed;
      if (cfg.compute != "cond") {
        MinresConfig mc;
        mc.rtol = cfg.rtol;
        mc.atol = cfg.atol;
        mc.max_iterations = cfg.max_iterations;
        mc.rng_seed = cfg.seed;
        auto [x, rep] = minres(sys, mc);
        r.iterations = rep.iterations;
        r.converged = rep.converged;
      }
      if (cfg.compute != "iterations") {
        // A system too large for the dense eigensolver route still produces a
        // row; the spectral cells stay empty to flag the skipped computation.
        bool within_cap = cfg.method == "iterative" || sys.total_dofs() <= cfg.dense_cap;
        if (within_cap) {
          ConditionOptions co;
          co.method = cfg.method;
          co.dense_cap = cfg.dense_cap;
          co.seed = cfg.seed;
          SpectrumReport sr = condition_number(sys, co);
          r.cond = sr.condition;
          r.lambda_min_abs = sr.lambda_min_abs;
          r.lambda_max_abs = sr.lambda_max_abs;
        }
      }
      if (cfg.timing) {
        auto t1 = std::chrono::steady_clock::now();
        r.seconds = std::chrono::duration<double>(t1 - t0).count();
      }
      records[i] = r;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < combos.size(); ++i)
    if (!errors[i].empty())
      throw std::runtime_error("run failed (precond=" + combos[i].precond + ", level=" +
                               std::to_string(combos[i].level) + "): " + errors[i]);
  return records;
}

void apply_thread_env() {
#ifdef _OPENMP
  const char* env = std::getenv("FRACPREC_THREADS");
  if (!env) return;
  int n = std::atoi(env);
  if (n > 0) omp_set_num_threads(n);
#endif
}

}  // namespace fracprec
