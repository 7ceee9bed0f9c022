#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmot/conditions.hpp"
#include "mmot/diagnostics.hpp"
#include "mmot/duality.hpp"
#include "mmot/json_io.hpp"
#include "mmot/rng.hpp"

namespace fs = std::filesystem;
using mmot::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConditionFailure = 2;

struct CommonOptions {
  std::string out_dir;
  std::string config_path;
  std::uint64_t seed = 0;
  double mass_tol = 1e-9;
  double det_tol = 1e-10;
  double twist_tol = 1e-8;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--out", opt.out_dir, "output directory for reports");
  cmd->add_option("--config", opt.config_path, "JSON config supplying defaults");
  cmd->add_option("--seed", opt.seed, "deterministic seed");
  cmd->add_option("--mass-tol", opt.mass_tol, "mass tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--det-tol", opt.det_tol, "determinant tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--twist-tol", opt.twist_tol, "gradient collision tolerance")
      ->check(CLI::PositiveNumber);
}

// Values from --config fill in options the command line left untouched.
void merge_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  const Json j = mmot::read_json_file(path);
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    CLI::Option* opt = nullptr;
    for (CLI::Option* o : cmd->get_options())
      if (o->check_name(flag)) { opt = o; break; }
    if (!opt || opt->count() > 0 || opt->get_expected_min() == 0) continue;
    const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    opt->add_result(text);
    opt->run_callback();
  }
}

void write_meta(const CommonOptions& opt, const std::string& command) {
  if (opt.out_dir.empty()) return;
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  Json meta;
  meta["command"] = command;
  meta["timestamp_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  mmot::write_json_file(fs::path(opt.out_dir) / "run_meta.json", meta);
}

std::vector<mmot::DomainBox> instance_domains(const mmot::Instance& inst) {
  std::vector<mmot::DomainBox> domains;
  for (const auto& mu : inst.marginals) domains.push_back(mu.box);
  return domains;
}

// ---------------------------------------------------------------------------
// Presets matching the builtin cost families.

Json preset_cost_json(const std::string& preset, int m, int dim) {
  Json j;
  j["m"] = m;
  j["dims"] = std::vector<int>(static_cast<std::size_t>(m), dim);
  auto identity = [&](double scale) {
    Json rows = Json::array();
    for (int r = 0; r < dim; ++r) {
      Json row = Json::array();
      for (int c = 0; c < dim; ++c) row.push_back(r == c ? scale : 0.0);
      rows.push_back(row);
    }
    return rows;
  };

  if (preset == "gs") {
    j["family"] = "concave_of_sum";
    j["params"] = {{"h", {{"kind", "neg_norm_sq"}, {"scale", 1.0}}}};
    return j;
  }
  if (preset == "bilinear-neg" || preset == "bilinear-pos") {
    if (m != 3) throw CLI::ValidationError("bilinear presets need --m 3");
    Json a = identity(preset == "bilinear-pos" ? 1.0 : -1.0);
    if (preset == "bilinear-neg" && dim >= 2) {
      a[0][1] = 0.3;
      a[1][0] = -0.3;
    }
    j["family"] = "bilinear";
    j["params"]["blocks"] = Json::array(
        {{{"i", 0}, {"j", 1}, {"matrix", identity(1.0)}},
         {{"i", 0}, {"j", 2}, {"matrix", identity(1.0)}},
         {{"i", 1}, {"j", 2}, {"matrix", a}}});
    return j;
  }
  if (preset == "gq") {
    if (m != 3) throw CLI::ValidationError("the gq preset needs --m 3");
    j["family"] = "g_plus_quadratic";
    j["params"] = {{"q", identity(1.0)}};
    return j;
  }
  if (preset == "hedonic") {
    j["family"] = "hedonic";
    Json comp;
    comp["P"] = identity(-1.0);
    comp["q"] = std::vector<double>(static_cast<std::size_t>(dim), 0.0);
    comp["B"] = identity(1.0);
    comp["b"] = std::vector<double>(static_cast<std::size_t>(dim), 0.0);
    comp["L"] = identity(1.0);
    comp["l"] = std::vector<double>(static_cast<std::size_t>(dim), 0.0);
    Json components = Json::array();
    for (int i = 0; i < m; ++i) components.push_back(comp);
    j["params"]["z_lower"] = std::vector<double>(static_cast<std::size_t>(dim), -0.5);
    j["params"]["z_upper"] = std::vector<double>(static_cast<std::size_t>(dim), 1.5);
    j["params"]["components"] = std::move(components);
    return j;
  }
  throw CLI::ValidationError("unknown preset: " + preset);
}

int run_gen(const CommonOptions& opt, const std::string& preset, int m, int n, int dim,
            bool weighted) {
  if (opt.out_dir.empty()) throw CLI::ValidationError("gen needs --out");
  const fs::path out(opt.out_dir);
  Json instance;
  Json marginal_paths = Json::array();
  for (int i = 0; i < m; ++i) {
    const mmot::DomainBox box = mmot::DomainBox::unit(dim);
    const std::uint64_t s = mmot::derive_seed(opt.seed, static_cast<std::uint64_t>(i));
    const mmot::DiscreteMarginal mu =
        weighted ? mmot::weighted_marginal(box, n, s) : mmot::uniform_marginal(box, n, s);
    const std::string name = "marginal_" + std::to_string(i) + ".json";
    mmot::write_json_file(out / name, mmot::marginal_to_json(mu));
    marginal_paths.push_back(name);
  }
  mmot::write_json_file(out / "cost.json", preset_cost_json(preset, m, dim));
  instance["marginals"] = std::move(marginal_paths);
  instance["cost"] = "cost.json";
  mmot::write_json_file(out / "instance.json", instance);
  write_meta(opt, "gen");
  return kExitOk;
}

int run_solve(const CommonOptions& opt, const std::string& instance_path,
              const std::string& solver, double epsilon, int max_iters, double tol) {
  const mmot::Instance inst = mmot::load_instance(instance_path);
  if (opt.out_dir.empty()) throw CLI::ValidationError("solve needs --out");
  const fs::path out(opt.out_dir);

  if (solver == "entropic") {
    const mmot::EntropicSolution sol = mmot::solve_entropic(inst, epsilon, max_iters, tol);
    mmot::write_json_file(out / "coupling.json", mmot::coupling_to_json(sol.coupling));
    Json report;
    report["converged"] = sol.converged;
    report["iterations"] = sol.iterations;
    report["marginal_tv_error"] = sol.marginal_error;
    report["objective"] = sol.coupling.objective;
    report["epsilon"] = epsilon;
    mmot::write_json_file(out / "entropic_report.json", report);
    write_meta(opt, "solve");
    return kExitOk;
  }

  const mmot::LpSolution sol = mmot::solve_lp(inst);
  const mmot::ConjugatePassResult pass =
      mmot::conjugate_pass(inst, mmot::Potentials::from_certificate(sol.dual));
  const mmot::SlacknessReport slack =
      mmot::verify_slackness(inst, sol.coupling, pass.potentials);
  mmot::write_json_file(out / "coupling.json", mmot::coupling_to_json(sol.coupling));
  mmot::write_json_file(out / "dual_certificate.json",
                        mmot::potentials_to_json(mmot::Potentials::from_certificate(sol.dual)));
  mmot::write_json_file(out / "potentials.json", mmot::potentials_to_json(pass.potentials));
  mmot::write_json_file(out / "slackness.json", mmot::slackness_report_to_json(slack));
  write_meta(opt, "solve");
  return kExitOk;
}

int run_check_conditions(const CommonOptions& opt, const std::string& instance_path,
                         int samples, int pairs) {
  const mmot::Instance inst = mmot::load_instance(instance_path);
  const auto domains = instance_domains(inst);
  const int m = inst.marginal_count();
  mmot::ConditionThresholds tol;
  tol.det_tol = opt.det_tol;
  tol.twist_tol = opt.twist_tol;

  Json reports = Json::array();
  bool any_fail = false;
  const auto add = [&](const mmot::ConditionReport& r) {
    any_fail = any_fail || (r.verdict == mmot::Verdict::fail);
    reports.push_back(mmot::condition_report_to_json(r));
  };
  add(mmot::check_twist(*inst.cost, domains, 0, m - 1, samples, pairs,
                        mmot::derive_seed(opt.seed, 1), tol));
  add(mmot::check_nondegenerate(*inst.cost, domains, 0, m - 1, samples,
                                mmot::derive_seed(opt.seed, 2), tol));
  if (m >= 3)
    add(mmot::scan_T_negative(*inst.cost, domains, samples,
                              mmot::derive_seed(opt.seed, 3), tol));
  if (!opt.out_dir.empty()) {
    mmot::write_json_file(fs::path(opt.out_dir) / "conditions.json", reports);
    write_meta(opt, "check-conditions");
  } else {
    std::cout << reports.dump(2) << "\n";
  }
  return any_fail ? kExitConditionFailure : kExitOk;
}

int run_conjugate(const CommonOptions& opt, const std::string& instance_path,
                  const std::string& start_path) {
  const mmot::Instance inst = mmot::load_instance(instance_path);
  if (opt.out_dir.empty()) throw CLI::ValidationError("conjugate needs --out");

  const mmot::Potentials start = start_path.empty()
                                     ? mmot::feasible_start(inst)
                                     : mmot::potentials_from_json(
                                           mmot::read_json_file(start_path));

  const mmot::ConjugatePassResult pass = mmot::conjugate_pass(inst, start);
  mmot::write_json_file(fs::path(opt.out_dir) / "potentials.json",
                        mmot::potentials_to_json(pass.potentials));
  Json report;
  report["dual_objective"] = pass.objective;
  report["max_conjugacy_residual"] = pass.max_conjugacy_residual;
  mmot::write_json_file(fs::path(opt.out_dir) / "conjugacy_report.json", report);
  write_meta(opt, "conjugate");
  return kExitOk;
}

int run_diagnose(const CommonOptions& opt, const std::string& instance_path,
                 const std::string& coupling_path, const std::string& solver,
                 double epsilon, int trials) {
  const mmot::Instance inst = mmot::load_instance(instance_path);
  if (opt.out_dir.empty()) throw CLI::ValidationError("diagnose needs --out");
  const fs::path out(opt.out_dir);

  mmot::Coupling coupling;
  bool approximate = false;
  if (!coupling_path.empty()) {
    coupling = mmot::coupling_from_json(mmot::read_json_file(coupling_path), inst);
  } else if (solver == "entropic") {
    const auto sol = mmot::solve_entropic(inst, epsilon, 20000, 1e-9);
    coupling = mmot::round_to_graph(sol.coupling, inst);
    approximate = true;
  } else {
    coupling = mmot::solve_lp(inst).coupling;
  }

  mmot::GraphVerdict verdict = mmot::graph_extract(coupling, inst, opt.mass_tol);
  verdict.approximate_source = approximate;
  mmot::write_json_file(out / "graph.json", mmot::graph_verdict_to_json(verdict));
  mmot::write_maps_csv(out / "maps.csv", verdict);

  if (verdict.is_graph) {
    const mmot::PushforwardReport push = mmot::pushforward_check(coupling, verdict, inst);
    mmot::write_json_file(out / "pushforward.json",
                          mmot::pushforward_report_to_json(push));
  }

  const mmot::UniquenessVerdict uniqueness =
      mmot::uniqueness_probe(inst, trials, mmot::derive_seed(opt.seed, 11), opt.mass_tol);
  mmot::write_json_file(out / "uniqueness.json",
                        mmot::uniqueness_verdict_to_json(uniqueness));

  const mmot::DualUniquenessReport dual_probe =
      mmot::dual_uniqueness_probe(inst, trials, mmot::derive_seed(opt.seed, 12));
  mmot::write_json_file(out / "dual_uniqueness.json",
                        mmot::dual_uniqueness_report_to_json(dual_probe));
  write_meta(opt, "diagnose");

  const bool healthy = verdict.is_graph && uniqueness.support_stable;
  return healthy ? kExitOk : kExitConditionFailure;
}

int run_certify(const CommonOptions& opt, const std::string& instance_path,
                const std::string& spec_path, int steps, int scan_samples) {
  const mmot::Instance inst = mmot::load_instance(instance_path);
  if (opt.out_dir.empty()) throw CLI::ValidationError("certify needs --out");
  const Json spec = mmot::read_json_file(spec_path);

  const auto vec = [](const Json& j) {
    Eigen::VectorXd v(j.size());
    int k = 0;
    for (const auto& x : j) v[k++] = x.get<double>();
    return v;
  };
  std::vector<Eigen::VectorXd> start, end;
  for (const auto& s : spec.at("start")) start.push_back(vec(s));
  for (const auto& e : spec.at("end")) end.push_back(vec(e));

  mmot::SegmentCertificateOptions cert_opts;
  cert_opts.steps = spec.value("steps", steps);
  cert_opts.det_tol = opt.det_tol;
  if (spec.contains("xm_seed")) cert_opts.xm_seed = vec(spec.at("xm_seed"));
  else cert_opts.xm_domain = inst.marginals.back().box;

  const double s_integral =
      mmot::segment_certificate(*inst.cost, vec(spec.at("x1")), vec(spec.at("u1_grad")),
                                start, end, cert_opts);

  mmot::ConditionThresholds tol;
  tol.det_tol = opt.det_tol;
  const double h_bound = mmot::scan_H_bound(*inst.cost, instance_domains(inst),
                                            scan_samples, mmot::derive_seed(opt.seed, 21),
                                            tol);
  double speed_sq = 0.0;
  for (std::size_t k = 0; k < start.size(); ++k) speed_sq += (end[k] - start[k]).squaredNorm();

  Json report;
  report["s_integral"] = s_integral;
  report["h_eigenvalue_bound"] = h_bound;
  report["h_term_bound"] = h_bound * speed_sq;
  report["combined_upper_bound"] = s_integral + std::max(0.0, h_bound) * speed_sq;
  mmot::write_json_file(fs::path(opt.out_dir) / "certificate.json", report);
  write_meta(opt, "certify");
  return s_integral < 0.0 ? kExitOk : kExitConditionFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete multi-marginal optimal transport toolkit"};
  app.require_subcommand(1);

  CommonOptions opt;

  // gen
  auto* gen = app.add_subcommand("gen", "sample marginals and write an instance");
  std::string preset = "gs";
  int m = 3, n = 5, dim = 2;
  bool weighted = false;
  gen->add_option("--preset", preset, "gs|bilinear-neg|bilinear-pos|gq|hedonic");
  gen->add_option("--m", m, "number of marginals")->check(CLI::Range(2, 8));
  gen->add_option("--n", n, "support points per marginal")->check(CLI::PositiveNumber);
  gen->add_option("--dim", dim, "dimension of every marginal")->check(CLI::Range(1, 4));
  gen->add_flag("--weighted", weighted, "Dirichlet weights instead of uniform");
  add_common(gen, opt);

  // solve
  auto* solve = app.add_subcommand("solve", "solve the discrete Kantorovich problem");
  std::string instance_path, solver = "lp";
  double epsilon = 0.1, entropic_tol = 1e-9;
  int max_iters = 20000;
  solve->add_option("--instance", instance_path, "instance JSON path");
  solve->add_option("--solver", solver, "lp|entropic")
      ->check(CLI::IsMember({"lp", "entropic"}));
  solve->add_option("--epsilon", epsilon, "entropic regularization")
      ->check(CLI::PositiveNumber);
  solve->add_option("--max-iters", max_iters, "entropic iteration cap");
  solve->add_option("--tol", entropic_tol, "entropic marginal TV tolerance");
  add_common(solve, opt);

  // check-conditions
  auto* check = app.add_subcommand("check-conditions",
                                   "scan twist, non-degeneracy and the T tensor");
  std::string check_instance;
  int samples = 64, pairs = 8;
  check->add_option("--instance", check_instance, "instance JSON path");
  check->add_option("--samples", samples, "sampled configurations")
      ->check(CLI::PositiveNumber);
  check->add_option("--pairs", pairs, "pairs per twist sample")->check(CLI::PositiveNumber);
  add_common(check, opt);

  // conjugate
  auto* conj = app.add_subcommand("conjugate", "run the convexification sweep");
  std::string conj_instance, start_path;
  conj->add_option("--instance", conj_instance, "instance JSON path");
  conj->add_option("--start", start_path, "starting potentials JSON");
  add_common(conj, opt);

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "graph extraction and uniqueness probes");
  std::string diag_instance, coupling_path, diag_solver = "lp";
  double diag_epsilon = 0.1;
  int trials = 6;
  diag->add_option("--instance", diag_instance, "instance JSON path");
  diag->add_option("--coupling", coupling_path, "coupling JSON (defaults to a fresh solve)");
  diag->add_option("--solver", diag_solver, "lp|entropic")
      ->check(CLI::IsMember({"lp", "entropic"}));
  diag->add_option("--epsilon", diag_epsilon, "entropic regularization");
  diag->add_option("--trials", trials, "perturbed re-solves")->check(CLI::Range(2, 64));
  add_common(diag, opt);

  // certify
  auto* cert = app.add_subcommand("certify", "segment certificate for given endpoints");
  std::string cert_instance, cert_spec;
  int steps = 64, scan_samples = 64;
  cert->add_option("--instance", cert_instance, "instance JSON path");
  cert->add_option("--spec", cert_spec, "JSON with x1, u1_grad, start, end");
  cert->add_option("--steps", steps, "quadrature nodes")->check(CLI::PositiveNumber);
  cert->add_option("--scan-samples", scan_samples, "samples for the H bound");
  add_common(cert, opt);

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto* cmd : {gen, solve, check, conj, diag, cert})
      if (cmd->parsed()) merge_config(cmd, opt.config_path);

    if (gen->parsed()) return run_gen(opt, preset, m, n, dim, weighted);
    if (solve->parsed())
      return run_solve(opt, instance_path, solver, epsilon, max_iters, entropic_tol);
    if (check->parsed()) return run_check_conditions(opt, check_instance, samples, pairs);
    if (conj->parsed()) return run_conjugate(opt, conj_instance, start_path);
    if (diag->parsed())
      return run_diagnose(opt, diag_instance, coupling_path, diag_solver, diag_epsilon,
                          trials);
    if (cert->parsed())
      return run_certify(opt, cert_instance, cert_spec, steps, scan_samples);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
