#include "mmot/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmot/rng.hpp"

namespace mmot {

Potentials Potentials::zeros(const Instance& inst) {
  Potentials pot;
  for (int i = 0; i < inst.marginal_count(); ++i)
    pot.values.push_back(Eigen::VectorXd::Zero(inst.sizes[static_cast<std::size_t>(i)]));
  return pot;
}

Potentials Potentials::from_certificate(const DualCertificate& cert) {
  return Potentials(cert.values);
}

namespace {

void check_shape(const Instance& inst, const Potentials& pot, const char* who) {
  if (static_cast<int>(pot.values.size()) != inst.marginal_count())
    throw std::invalid_argument(std::string(who) + ": potentials arity mismatch");
  for (int i = 0; i < inst.marginal_count(); ++i)
    if (pot.values[static_cast<std::size_t>(i)].size() !=
        inst.sizes[static_cast<std::size_t>(i)])
      throw std::invalid_argument(std::string(who) + ": potentials length mismatch");
}

double potential_sum_at(const Instance& inst, const Potentials& pot, std::size_t flat) {
  std::size_t rem = flat;
  double s = 0.0;
  for (int i = inst.marginal_count() - 1; i >= 0; --i) {
    const int n = inst.sizes[static_cast<std::size_t>(i)];
    s += pot.values[static_cast<std::size_t>(i)][static_cast<int>(
        rem % static_cast<std::size_t>(n))];
    rem /= static_cast<std::size_t>(n);
  }
  return s;
}

}  // namespace

double max_dual_violation(const Instance& inst, const Potentials& pot) {
  check_shape(inst, pot, "max_dual_violation");
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < inst.tensor_size(); ++flat)
    worst = std::max(worst, potential_sum_at(inst, pot, flat) - inst.cost_tensor[flat]);
  return worst;
}

Potentials feasible_start(const Instance& inst) {
  Potentials start = Potentials::zeros(inst);
  Eigen::VectorXd mins = Eigen::VectorXd::Constant(
      inst.sizes[0], std::numeric_limits<double>::infinity());
  const std::size_t stride = inst.tensor_size() / static_cast<std::size_t>(inst.sizes[0]);
  for (std::size_t flat = 0; flat < inst.tensor_size(); ++flat) {
    const int a0 = static_cast<int>(flat / stride);
    mins[a0] = std::min(mins[a0], inst.cost_tensor[flat]);
  }
  start.values[0] = mins;
  return start;
}

double dual_objective(const Instance& inst, const Potentials& pot) {
  check_shape(inst, pot, "dual_objective");
  double obj = 0.0;
  for (int i = 0; i < inst.marginal_count(); ++i)
    obj += pot.values[static_cast<std::size_t>(i)].dot(
        inst.marginals[static_cast<std::size_t>(i)].weights);
  return obj;
}

ConjugatePassResult conjugate_pass(const Instance& inst, const Potentials& start,
                                   double feas_tol) {
  check_shape(inst, start, "conjugate_pass");
  const double violation = max_dual_violation(inst, start);
  if (violation > feas_tol)
    throw std::invalid_argument("conjugate_pass: start potentials violate the dual "
                                "constraint by " + std::to_string(violation));

  const int m = inst.marginal_count();
  ConjugatePassResult out;
  out.potentials = start;
  out.attaining.resize(static_cast<std::size_t>(m));

  for (int i = 0; i < m; ++i) {
    const int n = inst.sizes[static_cast<std::size_t>(i)];
    Eigen::VectorXd best = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    auto& attain = out.attaining[static_cast<std::size_t>(i)];
    attain.assign(static_cast<std::size_t>(n), {});
    for (std::size_t flat = 0; flat < inst.tensor_size(); ++flat) {
      // residual = cost - sum of the other potentials at this tuple
      std::size_t rem = flat;
      double others = 0.0;
      int own_index = 0;
      for (int j = m - 1; j >= 0; --j) {
        const int nj = inst.sizes[static_cast<std::size_t>(j)];
        const int k = static_cast<int>(rem % static_cast<std::size_t>(nj));
        rem /= static_cast<std::size_t>(nj);
        if (j == i)
          own_index = k;
        else
          others += out.potentials.values[static_cast<std::size_t>(j)][k];
      }
      const double candidate = inst.cost_tensor[flat] - others;
      // Strict comparison keeps the lexicographically first attaining tuple.
      if (candidate < best[own_index]) {
        best[own_index] = candidate;
        attain[static_cast<std::size_t>(own_index)] = inst.unflatten(flat);
      }
    }
    out.potentials.values[static_cast<std::size_t>(i)] = best;
  }

  out.objective = dual_objective(inst, out.potentials);

  // Conjugacy residual of the final tuple.
  double residual = 0.0;
  for (int i = 0; i < m; ++i) {
    const int n = inst.sizes[static_cast<std::size_t>(i)];
    Eigen::VectorXd best = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    for (std::size_t flat = 0; flat < inst.tensor_size(); ++flat) {
      std::size_t rem = flat;
      double others = 0.0;
      int own_index = 0;
      for (int j = m - 1; j >= 0; --j) {
        const int nj = inst.sizes[static_cast<std::size_t>(j)];
        const int k = static_cast<int>(rem % static_cast<std::size_t>(nj));
        rem /= static_cast<std::size_t>(nj);
        if (j == i)
          own_index = k;
        else
          others += out.potentials.values[static_cast<std::size_t>(j)][k];
      }
      best[own_index] = std::min(best[own_index], inst.cost_tensor[flat] - others);
    }
    residual = std::max(
        residual,
        (best - out.potentials.values[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff());
  }
  out.max_conjugacy_residual = residual;
  return out;
}

SlacknessReport verify_slackness(const Instance& inst, const Coupling& coupling,
                                 const Potentials& pot) {
  check_shape(inst, pot, "verify_slackness");
  SlacknessReport report;
  double primal = 0.0;
  double gap = 0.0;
  for (const auto& [idx, mass] : coupling.entries) {
    const std::size_t flat = inst.flatten(idx);
    primal += mass * inst.cost_tensor[flat];
    gap = std::max(gap,
                   std::abs(inst.cost_tensor[flat] - potential_sum_at(inst, pot, flat)));
  }
  report.max_gap_on_support = gap;
  report.primal_objective = primal;
  report.dual_objective = dual_objective(inst, pot);
  report.gap = report.primal_objective - report.dual_objective;
  return report;
}

double OffsetStats::max_spread() const {
  double worst = 0.0;
  for (double s : spread) worst = std::max(worst, s);
  return worst;
}

OffsetStats offset_stats(const Instance& inst, const Potentials& a, const Potentials& b) {
  check_shape(inst, a, "offset_stats");
  check_shape(inst, b, "offset_stats");
  OffsetStats stats;
  double offset_sum = 0.0;
  for (int i = 0; i < inst.marginal_count(); ++i) {
    const auto& w = inst.marginals[static_cast<std::size_t>(i)].weights;
    const Eigen::VectorXd delta = a.values[static_cast<std::size_t>(i)] -
                                  b.values[static_cast<std::size_t>(i)];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double mean = 0.0;
    double mass = 0.0;
    for (int k = 0; k < delta.size(); ++k) {
      if (w[k] <= 0.0) continue;
      lo = std::min(lo, delta[k]);
      hi = std::max(hi, delta[k]);
      mean += w[k] * delta[k];
      mass += w[k];
    }
    stats.spread.push_back(mass > 0.0 ? hi - lo : 0.0);
    offset_sum += (mass > 0.0) ? mean / mass : 0.0;
  }
  stats.offset_sum = std::abs(offset_sum);
  return stats;
}

DualUniquenessReport dual_uniqueness_probe(const Instance& inst, int trials,
                                           std::uint64_t seed, double spread_tol,
                                           double pert_eps, bool explore_pivot_orders) {
  if (trials < 2)
    throw std::invalid_argument("dual_uniqueness_probe: trials must be >= 2");

  const LpSolution base = solve_lp(inst);
  const double optimum = base.dual.objective;
  const double scale = inst.cost_range() > 0.0 ? inst.cost_range() : 1.0;

  std::vector<Potentials> solutions;
  {
    ConjugatePassResult pass =
        conjugate_pass(inst, Potentials::from_certificate(base.dual));
    solutions.push_back(std::move(pass.potentials));
  }

  DualUniquenessReport report;
  report.trials = trials;
  for (int t = 1; t < trials; ++t) {
    DeterministicRng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<double> tilted = inst.cost_tensor;
    for (double& c : tilted) c += pert_eps * scale * (2.0 * rng.uniform01() - 1.0);
    std::vector<std::size_t> scan_order;
    if (explore_pivot_orders) scan_order = random_permutation(inst.tensor_size(), rng);
    const LpSolution perturbed = solve_lp_with_objective(inst, tilted, scan_order);

    // Re-price the tilted basis against the true cost: when it stays on the
    // optimal face this is an exact alternative dual vertex.
    Potentials start = Potentials::from_certificate(
        price_basis(inst, inst.cost_tensor, perturbed.basis));
    const double violation = max_dual_violation(inst, start);
    if (violation > 1e-9 * (1.0 + scale)) continue;  // basis left the face
    if (violation > 0.0) start.values[0].array() -= violation;
    ConjugatePassResult pass = conjugate_pass(inst, start);
    if (std::abs(pass.objective - optimum) > 1e-9 * (1.0 + std::abs(optimum))) continue;
    solutions.push_back(std::move(pass.potentials));
  }
  report.accepted = static_cast<int>(solutions.size());

  for (std::size_t p = 0; p < solutions.size(); ++p) {
    for (std::size_t q = p + 1; q < solutions.size(); ++q) {
      const OffsetStats stats = offset_stats(inst, solutions[p], solutions[q]);
      report.max_offset_spread = std::max(report.max_offset_spread, stats.max_spread());
      report.max_offset_sum = std::max(report.max_offset_sum, stats.offset_sum);
    }
  }
  report.constants_up_to_tolerance = report.max_offset_spread <= spread_tol;
  report.note =
      "sampled evidence; connectedness and positive-density hypotheses have no exact "
      "discrete analogue";
  return report;
}

}  // namespace mmot
