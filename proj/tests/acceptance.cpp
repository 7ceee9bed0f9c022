// Acceptance suite: one check block per shipping criterion, each printing a
// single [PASS]/[FAIL] line. Runs against the library exactly as the CLI
// does, with pinned seeds and tolerances.
#include <chrono>
#include <cmath>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mmot/conditions.hpp"
#include "mmot/diagnostics.hpp"
#include "mmot/duality.hpp"
#include "mmot/rng.hpp"

using namespace mmot;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << criterion << " " << name;
  if (!detail.empty()) std::cout << ": " << detail;
  std::cout << "\n";
  if (!ok) ++failures;
}

void warn(int criterion, const std::string& message) {
  std::cout << "[WARN] " << criterion << " " << message << "\n";
}

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

Eigen::MatrixXd identity(int n) { return Eigen::MatrixXd::Identity(n, n); }

std::shared_ptr<const CostModel> preset_cost(const std::string& preset, int m, int dim) {
  if (preset == "gs")
    return std::make_shared<ConcaveOfSumCost>(m, dim, std::make_shared<NegSquaredNorm>());
  if (preset == "bilinear-neg") {
    Eigen::MatrixXd a = -identity(dim);
    if (dim >= 2) {
      a(0, 1) = 0.3;
      a(1, 0) = -0.3;
    }
    return BilinearCost::normal_form(a);
  }
  if (preset == "bilinear-pos") return BilinearCost::normal_form(identity(dim));
  if (preset == "gq")
    return std::make_shared<GPlusQuadraticCost>(
        dim, std::make_shared<QuadraticDifference>(identity(dim)));
  if (preset == "hedonic") {
    std::vector<std::shared_ptr<const HedonicComponent>> comps;
    for (int i = 0; i < m; ++i)
      comps.push_back(AffineQuadraticComponent::squared_distance(dim));
    return std::make_shared<HedonicCost>(std::vector<int>(m, dim),
                                         DomainBox::cube(dim, -0.5, 1.5), std::move(comps));
  }
  throw std::invalid_argument("unknown preset " + preset);
}

Instance preset_instance(const std::string& preset, int m, int n, int dim,
                         std::uint64_t seed) {
  std::vector<DiscreteMarginal> marginals;
  for (int i = 0; i < m; ++i)
    marginals.push_back(uniform_marginal(DomainBox::unit(dim), n,
                                         derive_seed(seed, static_cast<std::uint64_t>(i))));
  return make_instance(std::move(marginals), preset_cost(preset, m, dim));
}

std::vector<DomainBox> cubes(int m, int dim, double lo = -1.0, double hi = 1.0) {
  return std::vector<DomainBox>(static_cast<std::size_t>(m), DomainBox::cube(dim, lo, hi));
}

TensorAssembly sampled_assembly(const CostModel& cost, const std::vector<DomainBox>& domains,
                                std::uint64_t seed) {
  const int m = cost.marginal_count();
  Configuration base = sample_interior_configuration(domains, derive_seed(seed, 0));
  std::vector<Configuration> companions;
  for (int k = 0; k + 2 < m; ++k) {
    Configuration comp = sample_configuration(domains, derive_seed(seed, k + 1));
    comp.coords[k + 1] = base.coords[k + 1];
    companions.push_back(std::move(comp));
  }
  return assemble_T(cost, base, companions);
}

double max_sym_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  return eig.eigenvalues().maxCoeff();
}

// The 20 instances shared by criteria 1-3.
struct NamedInstance {
  std::string label;
  Instance inst;
};

std::vector<NamedInstance> duality_instances() {
  std::vector<NamedInstance> out;
  std::uint64_t seed = 100;
  for (const std::string preset : {"gs", "bilinear-neg", "gq", "hedonic"}) {
    for (int n = 4; n <= 8; ++n) {
      const int dim = (n % 2 == 0) ? 2 : 1;
      out.push_back({preset + "/n" + std::to_string(n) + "/dim" + std::to_string(dim),
                     preset_instance(preset, 3, n, dim, seed++)});
    }
  }
  return out;
}

// --------------------------------------------------------------------------

void criterion_1_2_3() {
  const auto start = clock_type::now();
  const auto instances = duality_instances();

  double worst_duality = 0.0;
  double worst_idempotence = 0.0;
  double worst_slackness = 0.0;
  bool objective_monotone = true;
  std::string worst_label = "-";

  for (const auto& [label, inst] : instances) {
    const LpSolution lp = solve_lp(inst);
    const ConjugatePassResult pass =
        conjugate_pass(inst, Potentials::from_certificate(lp.dual));

    const double lp_gap = std::abs(lp.coupling.objective - lp.dual.objective);
    const double conj_gap = std::abs(lp.coupling.objective - pass.objective);
    if (std::max(lp_gap, conj_gap) > worst_duality) {
      worst_duality = std::max(lp_gap, conj_gap);
      worst_label = label;
    }
    objective_monotone = objective_monotone && (pass.objective >= lp.dual.objective - 1e-12);

    const ConjugatePassResult again = conjugate_pass(inst, pass.potentials);
    for (int i = 0; i < inst.marginal_count(); ++i)
      worst_idempotence = std::max(
          worst_idempotence,
          (again.potentials.values[i] - pass.potentials.values[i]).cwiseAbs().maxCoeff());
    objective_monotone = objective_monotone && (again.objective >= pass.objective - 1e-12);

    const SlacknessReport slack = verify_slackness(inst, lp.coupling, pass.potentials);
    worst_slackness = std::max(worst_slackness, slack.max_gap_on_support);
  }
  const double elapsed = seconds_since(start);

  report(1, "strong duality across 20 preset instances",
         worst_duality <= 1e-8 && elapsed < 10.0,
         "max |primal - dual| = " + fmt(worst_duality) + " (worst " + worst_label +
             "), runtime " + fmt(elapsed) + " s");
  report(2, "conjugation idempotent, dual objective never decreases",
         worst_idempotence <= 1e-12 && objective_monotone,
         "max second-pass drift = " + fmt(worst_idempotence));
  report(3, "complementary slackness on every optimal pair", worst_slackness <= 1e-9,
         "max |sum u - c| on support = " + fmt(worst_slackness));
}

void criterion_4() {
  const auto start = clock_type::now();
  double worst_analytic = 0.0;
  double worst_fd = 0.0;
  int samples = 0;
  for (int m : {3, 4}) {
    for (int n : {1, 2, 3}) {
      auto cost = std::make_shared<ConcaveOfSumCost>(m, n, std::make_shared<NegSquaredNorm>());
      FiniteDifferenceView fd_cost(cost);
      const auto domains = cubes(m, n);
      const Eigen::MatrixXd expect = -2.0 * identity((m - 2) * n);
      for (int s = 0; s < 17; ++s) {
        const std::uint64_t seed = derive_seed(400 + m * 10 + n, s);
        worst_analytic =
            std::max(worst_analytic, (sampled_assembly(*cost, domains, seed).T - expect)
                                         .cwiseAbs()
                                         .maxCoeff());
        worst_fd = std::max(worst_fd, (sampled_assembly(fd_cost, domains, seed).T - expect)
                                          .cwiseAbs()
                                          .maxCoeff());
        ++samples;
      }
    }
  }
  const double elapsed = seconds_since(start);
  report(4, "quadratic-profile tensor equals -2I blockwise",
         worst_analytic <= 1e-10 && worst_fd <= 1e-4 && elapsed < 5.0,
         std::to_string(samples) + " samples per path, analytic dev " + fmt(worst_analytic) +
             ", finite-difference dev " + fmt(worst_fd) + ", " + fmt(elapsed) + " s");
}

void criterion_5() {
  double worst_entry = 0.0;
  bool verdicts_match = true;
  DeterministicRng entries(500);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) a(r, c) = entries.uniform(-1.0, 1.0);
    auto cost = BilinearCost::normal_form(a);
    const auto domains = cubes(3, 2);
    for (int s = 0; s < 20; ++s)
      worst_entry = std::max(
          worst_entry,
          (sampled_assembly(*cost, domains, derive_seed(510 + trial, s)).T - a.transpose())
              .cwiseAbs()
              .maxCoeff());
    const ConditionReport scan =
        scan_T_negative(*cost, domains, 12, derive_seed(520, trial));
    const bool neg_def = max_sym_eigenvalue(a) < 0.0;
    verdicts_match = verdicts_match && ((scan.verdict == Verdict::pass) == neg_def);
  }
  const ConditionReport control =
      scan_T_negative(*BilinearCost::normal_form(identity(2)), cubes(3, 2), 12, 501);
  const bool control_fails = control.verdict == Verdict::fail;
  report(5, "bilinear tensor equals the transposed interaction",
         worst_entry <= 1e-10 && verdicts_match && control_fails,
         "max |T - A^T| over 20x20 draws = " + fmt(worst_entry) +
             ", scan verdicts track definiteness");
}

void criterion_6() {
  DeterministicRng entries(600);
  double worst = 0.0;
  bool all_negative = true;
  for (int trial = 0; trial < 10; ++trial) {
    // Uniformly convex quadratic profile: Q = I + R R^T.
    Eigen::MatrixXd r(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r(i, j) = entries.uniform(-0.5, 0.5);
    const Eigen::MatrixXd q = identity(2) + r * r.transpose();
    GPlusQuadraticCost cost(2, std::make_shared<QuadraticDifference>(q));
    const Eigen::MatrixXd expect = (-q).inverse();
    for (int s = 0; s < 10; ++s) {
      const TensorAssembly assembly =
          sampled_assembly(cost, cubes(3, 2), derive_seed(610 + trial, s));
      worst = std::max(worst, (assembly.T - expect).cwiseAbs().maxCoeff());
      all_negative = all_negative && max_sym_eigenvalue(assembly.T) < 0.0;
    }
  }
  report(6, "pair-interaction tensor equals the inverse cross block",
         worst <= 1e-8 && all_negative,
         "max |T - (D2 g)^{-1}| = " + fmt(worst) + ", all samples negative definite");
}

void criterion_7() {
  // Affine alpha_i, quadratic beta_i and lambda_i, distinct per marginal.
  const int dim = 2;
  std::vector<std::shared_ptr<const HedonicComponent>> comps;
  DeterministicRng entries(700);
  for (int i = 0; i < 3; ++i) {
    Eigen::MatrixXd p = -identity(dim);
    p(0, 1) = entries.uniform(-0.3, 0.3);
    Eigen::MatrixXd rb(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) rb(r, c) = entries.uniform(-0.4, 0.4);
    comps.push_back(std::make_shared<AffineQuadraticComponent>(
        p, Eigen::VectorXd::Zero(dim), identity(dim) + rb * rb.transpose(),
        Eigen::VectorXd::Zero(dim), identity(dim) * (1.0 + 0.2 * i),
        Eigen::VectorXd::Zero(dim)));
  }
  HedonicCost cost({dim, dim, dim}, DomainBox::cube(dim, -8.0, 8.0), comps);
  const auto domains = cubes(3, dim);

  double worst_hessian_diff = 0.0;
  bool blocks_negative = true;
  for (int s = 0; s < 20; ++s) {
    Configuration base = sample_interior_configuration(domains, derive_seed(701, 2 * s));
    Configuration companion = sample_configuration(domains, derive_seed(701, 2 * s + 1));
    companion.coords[1] = base.coords[1];
    const Eigen::VectorXd z_base = cost.inner_minimizer(base);
    const Eigen::VectorXd z_comp = cost.inner_minimizer(companion);
    const Eigen::MatrixXd diff = cost.component(1).hess_x(base.coords[1], z_comp) -
                                 cost.component(1).hess_x(base.coords[1], z_base);
    worst_hessian_diff = std::max(worst_hessian_diff, diff.cwiseAbs().maxCoeff());

    const TensorAssembly assembly = assemble_T(cost, base, {companion});
    blocks_negative = blocks_negative && max_sym_eigenvalue(assembly.T) < 0.0;
  }
  report(7, "hedonic Hessian-difference term vanishes, block negative definite",
         worst_hessian_diff <= 1e-6 && blocks_negative,
         "max Hessian-difference entry = " + fmt(worst_hessian_diff));
}

void criterion_8() {
  bool all_ok = true;
  double worst_off_graph = 0.0;
  double worst_oracle_gap = 0.0;
  double worst_push = 0.0;
  double worst_seed_time = 0.0;
  int runs = 0;
  for (int n : {4, 5, 6}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto start = clock_type::now();
      Instance inst = preset_instance("gs", 3, n, 2, seed);
      const LpSolution lp = solve_lp(inst);
      const GraphVerdict verdict = graph_extract(lp.coupling, inst);
      const MongeSolution monge = brute_force_monge(inst);
      const UniquenessVerdict uq = uniqueness_probe(inst, 6, derive_seed(seed, 99));

      bool ok = verdict.is_graph && verdict.off_graph_mass <= 1e-9 && uq.support_stable;
      worst_off_graph = std::max(worst_off_graph, verdict.off_graph_mass);
      worst_oracle_gap =
          std::max(worst_oracle_gap, std::abs(lp.coupling.objective - monge.objective));
      ok = ok && std::abs(lp.coupling.objective - monge.objective) <= 1e-9;
      if (verdict.is_graph) {
        const PushforwardReport push = pushforward_check(lp.coupling, verdict, inst);
        worst_push = std::max(worst_push, push.max_discrepancy);
        ok = ok && push.max_discrepancy <= 1e-9;
      }
      worst_seed_time = std::max(worst_seed_time, seconds_since(start));
      all_ok = all_ok && ok;
      ++runs;
    }
  }
  report(8, "graph concentration and Monge optimality on 30 runs",
         all_ok && worst_seed_time < 60.0,
         "off-graph <= " + fmt(worst_off_graph) + ", |LP - brute force| <= " +
             fmt(worst_oracle_gap) + ", pushforward <= " + fmt(worst_push) +
             ", slowest seed " + fmt(worst_seed_time) + " s");
}

void criterion_9() {
  // Negative control: the scan must reject A = +I decisively.
  auto control = BilinearCost::normal_form(identity(2));
  const ConditionReport scan = scan_T_negative(*control, cubes(3, 2), 16, 900);
  const bool scan_fails = scan.verdict == Verdict::fail && scan.worst_value >= 1.0 - 1e-9;

  int witnesses = 0;
  bool diagnostics_completed = true;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    try {
      Instance inst = preset_instance("bilinear-pos", 3, 4, 2, seed);
      const LpSolution lp = solve_lp(inst);
      const GraphVerdict verdict = graph_extract(lp.coupling, inst);
      const UniquenessVerdict uq = uniqueness_probe(inst, 6, derive_seed(seed, 5));
      if (!verdict.is_graph || !uq.support_stable) ++witnesses;
    } catch (const std::exception&) {
      diagnostics_completed = false;
    }
  }
  if (witnesses == 0)
    warn(9, "no splitting witness found across 50 seeds (soft warning)");
  report(9, "positive-definite control fails the scan, diagnostics complete",
         scan_fails && diagnostics_completed,
         "scan worst_value = " + fmt(scan.worst_value) + ", splitting witnesses " +
             std::to_string(witnesses) + "/50");
}

void criterion_10() {
  double worst_spread = 0.0;
  double worst_sum = 0.0;
  bool all_constant = true;
  for (std::uint64_t seed : {42, 7, 21}) {
    Instance inst = preset_instance("gs", 3, 5, 2, seed);
    const DualUniquenessReport probe = dual_uniqueness_probe(inst, 6, derive_seed(seed, 1));
    worst_spread = std::max(worst_spread, probe.max_offset_spread);
    worst_sum = std::max(worst_sum, probe.max_offset_sum);
    all_constant = all_constant && probe.constants_up_to_tolerance;
  }

  // Two far-separated clusters, pairwise quadratic interactions: the optimal
  // coupling never crosses, leaving an inter-cluster constant free. Pivot
  // order exploration exhibits it; the default tilts cannot leave the
  // incumbent basis here.
  bool cluster_flagged = false;
  bool cluster_crashed = false;
  try {
    const DomainBox box = DomainBox::cube(1, -1.0, 102.0);
    std::vector<Eigen::VectorXd> pts;
    for (double v : {0.0, 0.7, 100.0, 100.7})
      pts.push_back(Eigen::VectorXd::Constant(1, v));
    Eigen::VectorXd w = Eigen::VectorXd::Constant(4, 0.25);
    DiscreteMarginal mu(box, pts, w);
    auto g = std::make_shared<QuadraticDifference>(identity(1));
    Instance cluster =
        make_instance({mu, mu, mu}, std::make_shared<GPlusQuadraticCost>(1, g));
    const DualUniquenessReport broad = dual_uniqueness_probe(
        cluster, 8, 3, 1e-6, 1e-7, /*explore_pivot_orders=*/true);
    cluster_flagged = !broad.constants_up_to_tolerance && broad.max_offset_spread > 1e-6;
  } catch (const std::exception&) {
    cluster_crashed = true;
  }

  report(10, "dual offsets constant on connected instances, cluster split flagged",
         all_constant && worst_spread <= 1e-6 && worst_sum <= 1e-6 && cluster_flagged &&
             !cluster_crashed,
         "max spread " + fmt(worst_spread) + ", max offset sum " + fmt(worst_sum) +
             ", cluster instance flagged " + (cluster_flagged ? "yes" : "no"));
}

void criterion_11() {
  double worst_rel = 0.0;
  std::string worst_family = "-";
  const auto check_family = [&](const std::string& name, const CostModel& cost,
                                std::uint64_t seed) {
    for (int s = 0; s < 100; ++s) {
      DeterministicRng rng(derive_seed(seed, s));
      std::vector<Eigen::VectorXd> coords;
      for (int i = 0; i < cost.marginal_count(); ++i) {
        Eigen::VectorXd c(cost.dim(i));
        for (int k = 0; k < cost.dim(i); ++k) c[k] = rng.uniform(-1.0, 1.0);
        coords.push_back(std::move(c));
      }
      const Configuration x{std::move(coords)};
      for (int i = 0; i < cost.marginal_count(); ++i) {
        for (int j = 0; j < cost.marginal_count(); ++j) {
          const Eigen::MatrixXd analytic = cost.second_differential(i, j, x).matrix;
          const Eigen::MatrixXd fd = cost.fd_second(i, j, x);
          const double tol = std::max(1e-5, 1e-4 * analytic.norm());
          const double rel = (analytic - fd).cwiseAbs().maxCoeff() / tol;
          if (rel > worst_rel) {
            worst_rel = rel;
            worst_family = name;
          }
        }
      }
    }
  };

  ConcaveOfSumCost gs(3, 2, std::make_shared<NegSquaredNorm>());
  check_family("concave_of_sum", gs, 1100);
  Eigen::VectorXd freq(2);
  freq << 1.3, -0.7;
  ConcaveOfSumCost perturbed(
      3, 2,
      std::make_shared<SinePerturbedProfile>(std::make_shared<NegSquaredNorm>(), 0.3, freq,
                                             0.4));
  check_family("concave_of_sum_perturbed", perturbed, 1101);
  DeterministicRng ar(1102);
  Eigen::MatrixXd a(2, 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) a(r, c) = ar.uniform(-1.0, 1.0);
  check_family("bilinear", *BilinearCost::normal_form(a), 1103);
  Eigen::MatrixXd q(2, 2);
  q << 2.0, 0.3, 0.3, 1.5;
  GPlusQuadraticCost gq(2, std::make_shared<QuadraticDifference>(q));
  check_family("g_plus_quadratic", gq, 1104);
  std::vector<std::shared_ptr<const HedonicComponent>> comps;
  for (int i = 0; i < 3; ++i) comps.push_back(AffineQuadraticComponent::squared_distance(1));
  HedonicCost hedonic({1, 1, 1}, DomainBox::cube(1, -4.0, 4.0), comps);
  check_family("hedonic", hedonic, 1105);

  report(11, "analytic and finite-difference second differentials agree",
         worst_rel <= 1.0,
         "100 configurations per family, worst deviation at " + fmt(100.0 * worst_rel) +
             "% of tolerance (" + worst_family + ")");
}

void criterion_12() {
  double worst_range_rel = 0.0;
  double worst_lp_rel = 0.0;
  double worst_tv = 0.0;
  bool all_converged = true;
  for (int n : {4, 5, 6}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Instance inst = preset_instance("gs", 3, n, 2, seed);
      const double lp = solve_lp(inst).coupling.objective;
      const double epsilon = 0.01 * inst.cost_range();
      const EntropicSolution sol = solve_entropic(inst, epsilon, 50000, 1e-6);
      all_converged = all_converged && sol.converged;
      worst_tv = std::max(worst_tv, sol.marginal_error);
      const double gap = std::abs(sol.coupling.objective - lp);
      worst_range_rel = std::max(worst_range_rel, gap / inst.cost_range());
      worst_lp_rel = std::max(worst_lp_rel, gap / std::abs(lp));
    }
  }
  // Known red: the regularization bias at this epsilon is ~0.9 * epsilon,
  // which already exceeds 1% of |LP| (and marginally 1% of the cost range)
  // on several instances; the gap is converged, not a solver artifact.
  report(12, "entropic objective within 1% of LP at epsilon = 0.01 * cost range",
         all_converged && worst_lp_rel <= 0.01 && worst_tv <= 1e-6,
         "max gap = " + fmt(100.0 * worst_lp_rel) + "% of |LP| (" +
             fmt(100.0 * worst_range_rel) + "% of range), max marginal TV = " +
             fmt(worst_tv));
}

}  // namespace

int main() {
  const auto start = clock_type::now();
  criterion_1_2_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  std::cout << "total runtime " << fmt(seconds_since(start)) << " s\n";
  if (failures) {
    std::cerr << failures << " criterion check(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
