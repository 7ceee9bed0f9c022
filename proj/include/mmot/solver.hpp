#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "mmot/costs.hpp"
#include "mmot/geometry.hpp"

namespace mmot {

// Discrete problem instance with the cost tensor materialized over the
// product of support grids (row-major, last index fastest).
struct Instance {
  std::vector<DiscreteMarginal> marginals;
  std::shared_ptr<const CostModel> cost;
  std::vector<int> sizes;
  std::vector<double> cost_tensor;

  int marginal_count() const { return static_cast<int>(marginals.size()); }
  std::size_t tensor_size() const { return cost_tensor.size(); }

  std::size_t flatten(const std::vector<int>& idx) const;
  std::vector<int> unflatten(std::size_t flat) const;
  double cost_at(const std::vector<int>& idx) const { return cost_tensor[flatten(idx)]; }
  Configuration configuration_at(const std::vector<int>& idx) const;

  double cost_min = 0.0;
  double cost_max = 0.0;
  double cost_range() const { return cost_max - cost_min; }
};

// Evaluates the cost on every grid tuple. Parallel across slices when the
// tensor is large; MMOT_THREADS caps the worker count.
Instance make_instance(std::vector<DiscreteMarginal> marginals,
                       std::shared_ptr<const CostModel> cost,
                       std::size_t materialization_cap = 1'000'000);

// Sparse nonnegative measure on the product grid. Entries hold strictly
// positive mass only.
struct Coupling {
  std::map<std::vector<int>, double> entries;
  double objective = 0.0;
};

Eigen::VectorXd coupling_marginal(const Coupling& coupling, int axis,
                                  const std::vector<int>& sizes);
// Componentwise worst marginal violation across axes.
double max_marginal_error(const Coupling& coupling, const Instance& inst);
// Worst total-variation marginal error across axes.
double max_marginal_tv_error(const Coupling& coupling, const Instance& inst);

// One value per support point per marginal; feasible for the dual when
// sum_i values[i][a_i] <= cost everywhere.
struct DualCertificate {
  std::vector<Eigen::VectorXd> values;
  double objective = 0.0;
};

struct LpSolution {
  Coupling coupling;
  DualCertificate dual;
  std::vector<std::size_t> basis;  // basic tuple indices (flattened)
  int iterations = 0;
};

// Exact solve by revised simplex with Bland's rule; returns a vertex of the
// transport polytope and the matching dual certificate.
LpSolution solve_lp(const Instance& inst);

// Same solver against an alternative objective vector (same shape as the
// cost tensor); masses in the result are priced with the override. A
// nonempty scan_order permutes the variable order Bland's rule works
// through, which selects other optimal bases on degenerate faces.
LpSolution solve_lp_with_objective(const Instance& inst,
                                   const std::vector<double>& objective,
                                   const std::vector<std::size_t>& scan_order = {});

// Dual certificate of a given basis priced against an arbitrary objective;
// used to recover exact alternative dual vertices from tilted solves.
DualCertificate price_basis(const Instance& inst, const std::vector<double>& objective,
                            const std::vector<std::size_t>& basis);

struct EntropicSolution {
  Coupling coupling;
  int iterations = 0;
  bool converged = false;
  double marginal_error = 0.0;  // worst TV error at exit
};

// Cyclic log-domain scaling against exp(-cost/epsilon); converges when every
// marginal matches within `tol` in total variation.
EntropicSolution solve_entropic(const Instance& inst, double epsilon, int max_iters,
                                double tol);

struct MongeSolution {
  // maps[k] is the permutation coupling marginal 0 to marginal k+1.
  std::vector<std::vector<int>> maps;
  double objective = 0.0;
};

// Exhaustive search over permutation tuples; requires uniform marginals of
// equal size. Ties resolve to the lexicographically first tuple.
MongeSolution brute_force_monge(const Instance& inst, std::size_t work_cap = 50'000'000);

// The coupling induced by permutation maps on uniform weights.
Coupling coupling_from_maps(const Instance& inst, const std::vector<std::vector<int>>& maps);

}  // namespace mmot
