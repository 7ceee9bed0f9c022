#include "mmot/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "mmot/rng.hpp"

namespace mmot {

GraphVerdict graph_extract(const Coupling& coupling, const Instance& inst,
                           double mass_tol) {
  const int m = inst.marginal_count();
  GraphVerdict verdict;

  // Entries grouped by first atom.
  std::map<int, std::vector<std::pair<const std::vector<int>*, double>>> groups;
  for (const auto& [idx, mass] : coupling.entries) groups[idx[0]].push_back({&idx, mass});

  int max_fanout = 0;
  double off_graph = 0.0;
  std::vector<std::vector<int>> maps(static_cast<std::size_t>(m - 1));
  for (auto& mp : maps) mp.assign(static_cast<std::size_t>(inst.sizes[0]), -1);

  // Coupling mass received per target atom, for the saturation heuristic.
  std::vector<Eigen::VectorXd> received(static_cast<std::size_t>(m));
  for (int i = 1; i < m; ++i)
    received[static_cast<std::size_t>(i)] = coupling_marginal(coupling, i, inst.sizes);

  for (const auto& [a0, tuples] : groups) {
    int fanout = 0;
    double total = 0.0;
    double heaviest = 0.0;
    const std::vector<int>* heaviest_idx = nullptr;
    for (const auto& [idx, mass] : tuples) {
      total += mass;
      if (mass > mass_tol) ++fanout;
      if (mass > heaviest) {
        heaviest = mass;
        heaviest_idx = idx;
      }
    }
    max_fanout = std::max(max_fanout, fanout);
    off_graph += total - heaviest;
    if (heaviest_idx)
      for (int i = 1; i < m; ++i)
        maps[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(a0)] =
            (*heaviest_idx)[static_cast<std::size_t>(i)];

    if (fanout > 1) {
      bool weight_driven = false;
      for (const auto& [idx, mass] : tuples) {
        if (mass <= mass_tol) continue;
        for (int i = 1; i < m && !weight_driven; ++i) {
          const int b = (*idx)[static_cast<std::size_t>(i)];
          const double capacity = inst.marginals[static_cast<std::size_t>(i)].weights[b];
          const bool saturated =
              received[static_cast<std::size_t>(i)][b] >= capacity - mass_tol;
          weight_driven = saturated && capacity < total - mass_tol;
        }
        if (weight_driven) break;
      }
      if (weight_driven)
        ++verdict.weight_driven_fanout_atoms;
      else
        ++verdict.unexplained_fanout_atoms;
    }
  }

  verdict.max_fanout = max_fanout;
  verdict.off_graph_mass = off_graph;
  verdict.is_graph = (max_fanout == 1);
  if (verdict.is_graph) verdict.maps = std::move(maps);
  return verdict;
}

Coupling round_to_graph(const Coupling& coupling, const Instance& inst) {
  std::map<int, std::pair<std::vector<int>, double>> heaviest;
  for (const auto& [idx, mass] : coupling.entries) {
    auto it = heaviest.find(idx[0]);
    if (it == heaviest.end() || mass > it->second.second)
      heaviest[idx[0]] = {idx, mass};
  }
  Coupling rounded;
  for (auto& [a0, pick] : heaviest) {
    const double mass = inst.marginals[0].weights[a0];
    if (mass <= 0.0) continue;
    rounded.entries[pick.first] = mass;
    rounded.objective += mass * inst.cost_at(pick.first);
  }
  return rounded;
}

PushforwardReport pushforward_check(const Coupling& coupling, const GraphVerdict& verdict,
                                    const Instance& inst) {
  (void)coupling;
  if (!verdict.is_graph)
    throw std::invalid_argument("pushforward_check: requires a graph verdict");
  const int m = inst.marginal_count();
  PushforwardReport report;
  for (int i = 1; i < m; ++i) {
    const auto& mu = inst.marginals[static_cast<std::size_t>(i)];
    Eigen::VectorXd preimage_mass = Eigen::VectorXd::Zero(mu.size());
    const auto& map = verdict.maps[static_cast<std::size_t>(i - 1)];
    for (int a0 = 0; a0 < inst.sizes[0]; ++a0) {
      const int target = map[static_cast<std::size_t>(a0)];
      if (target >= 0) preimage_mass[target] += inst.marginals[0].weights[a0];
    }
    const double disc = (preimage_mass - mu.weights).cwiseAbs().maxCoeff();
    report.per_marginal.push_back(disc);
    report.max_discrepancy = std::max(report.max_discrepancy, disc);
  }
  return report;
}

namespace {

std::set<std::vector<int>> support_of(const Coupling& coupling, double mass_tol) {
  std::set<std::vector<int>> support;
  for (const auto& [idx, mass] : coupling.entries)
    if (mass > mass_tol) support.insert(idx);
  return support;
}

double symmetric_difference_mass(const Coupling& a, const Coupling& b, double mass_tol) {
  const auto sa = support_of(a, mass_tol);
  const auto sb = support_of(b, mass_tol);
  double total = 0.0;
  for (const auto& [idx, mass] : a.entries)
    if (mass > mass_tol && !sb.count(idx)) total += mass;
  for (const auto& [idx, mass] : b.entries)
    if (mass > mass_tol && !sa.count(idx)) total += mass;
  return total;
}

}  // namespace

UniquenessVerdict uniqueness_probe(const Instance& inst, int trials, std::uint64_t seed,
                                   double mass_tol, double pert_eps) {
  if (trials < 2) throw std::invalid_argument("uniqueness_probe: trials must be >= 2");

  const LpSolution base = solve_lp(inst);
  const double optimum = base.coupling.objective;
  const double scale = inst.cost_range() > 0.0 ? inst.cost_range() : 1.0;

  std::vector<Coupling> accepted;
  accepted.push_back(base.coupling);
  for (int t = 1; t < trials; ++t) {
    DeterministicRng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<double> tilted = inst.cost_tensor;
    for (double& c : tilted) c += pert_eps * scale * (2.0 * rng.uniform01() - 1.0);
    const auto scan_order = random_permutation(inst.tensor_size(), rng);
    LpSolution sol = solve_lp_with_objective(inst, tilted, scan_order);

    double true_objective = 0.0;
    for (const auto& [idx, mass] : sol.coupling.entries)
      true_objective += mass * inst.cost_at(idx);
    if (std::abs(true_objective - optimum) > 1e-9 * (1.0 + std::abs(optimum))) continue;
    sol.coupling.objective = true_objective;
    accepted.push_back(std::move(sol.coupling));
  }
  if (accepted.size() < 2)
    throw std::runtime_error("uniqueness_probe: every perturbed solution drifted off the "
                             "optimal face; reduce pert_eps");

  UniquenessVerdict verdict;
  verdict.trials = trials;
  verdict.accepted = static_cast<int>(accepted.size());
  for (std::size_t p = 0; p < accepted.size(); ++p)
    for (std::size_t q = p + 1; q < accepted.size(); ++q)
      verdict.max_support_symmetric_difference_mass =
          std::max(verdict.max_support_symmetric_difference_mass,
                   symmetric_difference_mass(accepted[p], accepted[q], mass_tol));
  verdict.support_stable = verdict.max_support_symmetric_difference_mass <= mass_tol;
  return verdict;
}

}  // namespace mmot
