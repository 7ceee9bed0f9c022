#include "mmot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include <Eigen/Dense>

namespace mmot {

std::size_t Instance::flatten(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int i = 0; i < marginal_count(); ++i)
    flat = flat * static_cast<std::size_t>(sizes[i]) + static_cast<std::size_t>(idx[i]);
  return flat;
}

std::vector<int> Instance::unflatten(std::size_t flat) const {
  std::vector<int> idx(static_cast<std::size_t>(marginal_count()));
  for (int i = marginal_count() - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(flat % static_cast<std::size_t>(sizes[i]));
    flat /= static_cast<std::size_t>(sizes[i]);
  }
  return idx;
}

Configuration Instance::configuration_at(const std::vector<int>& idx) const {
  std::vector<Eigen::VectorXd> coords;
  coords.reserve(static_cast<std::size_t>(marginal_count()));
  for (int i = 0; i < marginal_count(); ++i)
    coords.push_back(marginals[i].points[static_cast<std::size_t>(idx[i])]);
  return Configuration(std::move(coords));
}

namespace {

int thread_budget(std::size_t work) {
  if (work < 4096) return 1;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("MMOT_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
  }
  return static_cast<int>(hw);
}

}  // namespace

Instance make_instance(std::vector<DiscreteMarginal> marginals,
                       std::shared_ptr<const CostModel> cost,
                       std::size_t materialization_cap) {
  if (!cost) throw std::invalid_argument("make_instance: null cost");
  if (static_cast<int>(marginals.size()) != cost->marginal_count())
    throw std::invalid_argument("make_instance: marginal count mismatch");
  for (int i = 0; i < cost->marginal_count(); ++i)
    if (marginals[static_cast<std::size_t>(i)].dim() != cost->dim(i))
      throw std::invalid_argument("make_instance: marginal " + std::to_string(i) +
                                  " dimension mismatch");

  Instance inst;
  inst.marginals = std::move(marginals);
  inst.cost = std::move(cost);
  std::size_t total = 1;
  for (const auto& mu : inst.marginals) {
    inst.sizes.push_back(mu.size());
    if (total > materialization_cap / static_cast<std::size_t>(mu.size()))
      throw std::invalid_argument("make_instance: tensor exceeds the materialization cap");
    total *= static_cast<std::size_t>(mu.size());
  }

  inst.cost_tensor.resize(total);
  const int workers = thread_budget(total);
  const auto fill = [&](std::size_t begin, std::size_t end) {
    std::vector<int> idx(static_cast<std::size_t>(inst.marginal_count()), 0);
    for (std::size_t flat = begin; flat < end; ++flat) {
      idx = inst.unflatten(flat);
      inst.cost_tensor[flat] = inst.cost->value(inst.configuration_at(idx));
    }
  };
  if (workers == 1) {
    fill(0, total);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = static_cast<std::size_t>(w) * chunk;
      const std::size_t end = std::min(total, begin + chunk);
      if (begin < end) pool.emplace_back(fill, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  inst.cost_min = *std::min_element(inst.cost_tensor.begin(), inst.cost_tensor.end());
  inst.cost_max = *std::max_element(inst.cost_tensor.begin(), inst.cost_tensor.end());
  return inst;
}

Eigen::VectorXd coupling_marginal(const Coupling& coupling, int axis,
                                  const std::vector<int>& sizes) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(sizes[static_cast<std::size_t>(axis)]);
  for (const auto& [idx, mass] : coupling.entries)
    w[idx[static_cast<std::size_t>(axis)]] += mass;
  return w;
}

double max_marginal_error(const Coupling& coupling, const Instance& inst) {
  double worst = 0.0;
  for (int i = 0; i < inst.marginal_count(); ++i) {
    const Eigen::VectorXd w = coupling_marginal(coupling, i, inst.sizes);
    worst = std::max(worst,
                     (w - inst.marginals[static_cast<std::size_t>(i)].weights)
                         .cwiseAbs()
                         .maxCoeff());
  }
  return worst;
}

double max_marginal_tv_error(const Coupling& coupling, const Instance& inst) {
  double worst = 0.0;
  for (int i = 0; i < inst.marginal_count(); ++i) {
    const Eigen::VectorXd w = coupling_marginal(coupling, i, inst.sizes);
    worst = std::max(
        worst,
        0.5 * (w - inst.marginals[static_cast<std::size_t>(i)].weights).cwiseAbs().sum());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Revised simplex on the transportation constraints. Row set: marginal 0
// keeps all atoms, every later marginal drops its last atom (the dropped
// equalities are implied by the kept ones), which leaves a full-rank system.
// Columns are implicit: the column of tuple a has a unit at each kept row it
// touches. Bland's rule on both the entering and leaving choices guards
// against cycling on the (heavily degenerate) transport polytope.

namespace {

// Kept constraint rows: every atom of marginal 0, every atom but the last of
// each later marginal.
std::vector<int> kept_row_offsets(const Instance& inst, int* rows_out) {
  const int m = inst.marginal_count();
  std::vector<int> offsets(static_cast<std::size_t>(m), 0);
  int rows = inst.sizes[0];
  for (int i = 1; i < m; ++i) {
    offsets[static_cast<std::size_t>(i)] = rows;
    rows += inst.sizes[static_cast<std::size_t>(i)] - 1;
  }
  if (rows_out) *rows_out = rows;
  return offsets;
}

void tuple_column_rows(const Instance& inst, const std::vector<int>& offsets,
                       std::size_t v, std::vector<int>& out) {
  out.clear();
  const std::vector<int> idx = inst.unflatten(v);
  out.push_back(idx[0]);
  for (int i = 1; i < inst.marginal_count(); ++i)
    if (idx[static_cast<std::size_t>(i)] + 1 < inst.sizes[static_cast<std::size_t>(i)])
      out.push_back(offsets[static_cast<std::size_t>(i)] + idx[static_cast<std::size_t>(i)]);
}

Eigen::VectorXd kept_rhs(const Instance& inst, const std::vector<int>& offsets, int rows) {
  Eigen::VectorXd rhs(rows);
  for (int k = 0; k < inst.sizes[0]; ++k) rhs[k] = inst.marginals[0].weights[k];
  for (int i = 1; i < inst.marginal_count(); ++i)
    for (int k = 0; k + 1 < inst.sizes[static_cast<std::size_t>(i)]; ++k)
      rhs[offsets[static_cast<std::size_t>(i)] + k] =
          inst.marginals[static_cast<std::size_t>(i)].weights[k];
  return rhs;
}

DualCertificate certificate_from_multipliers(const Instance& inst,
                                             const std::vector<int>& offsets,
                                             const Eigen::VectorXd& y) {
  DualCertificate dual;
  dual.values.resize(static_cast<std::size_t>(inst.marginal_count()));
  dual.values[0] = y.segment(0, inst.sizes[0]);
  for (int i = 1; i < inst.marginal_count(); ++i) {
    Eigen::VectorXd vi = Eigen::VectorXd::Zero(inst.sizes[static_cast<std::size_t>(i)]);
    for (int k = 0; k + 1 < inst.sizes[static_cast<std::size_t>(i)]; ++k)
      vi[k] = y[offsets[static_cast<std::size_t>(i)] + k];
    dual.values[static_cast<std::size_t>(i)] = vi;
  }
  dual.objective = 0.0;
  for (int i = 0; i < inst.marginal_count(); ++i)
    dual.objective += dual.values[static_cast<std::size_t>(i)].dot(
        inst.marginals[static_cast<std::size_t>(i)].weights);
  return dual;
}

class TransportSimplex {
 public:
  TransportSimplex(const Instance& inst, const std::vector<double>& objective,
                   const std::vector<std::size_t>& scan_order)
      : inst_(inst), cost_(objective) {
    row_offset_ = kept_row_offsets(inst, &rows_);
    rhs_ = kept_rhs(inst, row_offset_, rows_);
    n_vars_ = inst.tensor_size();
    if (scan_order.empty()) {
      order_.resize(n_vars_);
      for (std::size_t v = 0; v < n_vars_; ++v) order_[v] = v;
    } else {
      if (scan_order.size() != n_vars_)
        throw std::invalid_argument("transport LP: scan order size mismatch");
      order_ = scan_order;
    }
    position_.resize(n_vars_);
    for (std::size_t k = 0; k < n_vars_; ++k) position_[order_[k]] = k;
  }

  LpSolution solve() {
    basis_inverse_ = Eigen::MatrixXd::Identity(rows_, rows_);
    basic_vars_.resize(static_cast<std::size_t>(rows_));
    // Artificial variables are indexed past the real columns.
    for (int r = 0; r < rows_; ++r)
      basic_vars_[static_cast<std::size_t>(r)] = n_vars_ + static_cast<std::size_t>(r);
    x_basic_ = rhs_;

    run_phase(/*phase_one=*/true);
    if (phase_objective(true) > 1e-7)
      throw std::runtime_error("transport LP: phase one failed (infeasible marginals?)");
    expel_artificials();
    run_phase(/*phase_one=*/false);
    return extract();
  }

  int iterations() const { return iterations_; }

 private:
  double column_cost(std::size_t v, bool phase_one) const {
    if (v >= n_vars_) return phase_one ? 1.0 : 0.0;
    return phase_one ? 0.0 : cost_[v];
  }

  double phase_objective(bool phase_one) const {
    double obj = 0.0;
    for (int r = 0; r < rows_; ++r)
      obj += column_cost(basic_vars_[static_cast<std::size_t>(r)], phase_one) * x_basic_[r];
    return obj;
  }

  // Kept rows hit by a column (artificials sit past the real columns).
  void column_rows(std::size_t v, std::vector<int>& out) const {
    if (v >= n_vars_) {
      out.clear();
      out.push_back(static_cast<int>(v - n_vars_));
      return;
    }
    tuple_column_rows(inst_, row_offset_, v, out);
  }

  Eigen::VectorXd multipliers(bool phase_one) const {
    Eigen::VectorXd cb(rows_);
    for (int r = 0; r < rows_; ++r)
      cb[r] = column_cost(basic_vars_[static_cast<std::size_t>(r)], phase_one);
    return basis_inverse_.transpose() * cb;
  }

  void run_phase(bool phase_one) {
    std::vector<int> rows;
    std::vector<char> is_basic(n_vars_ + static_cast<std::size_t>(rows_), 0);
    for (std::size_t r = 0; r < basic_vars_.size(); ++r) is_basic[basic_vars_[r]] = 1;

    const double enter_tol = 1e-11 * (1.0 + max_abs_cost());
    for (;; ++iterations_) {
      if (iterations_ > iteration_cap_)
        throw std::runtime_error("transport LP: iteration cap exceeded");
      const Eigen::VectorXd y = multipliers(phase_one);

      // Entering: first column in scan order with negative reduced cost
      // (Bland's rule on the permuted variable order).
      std::size_t entering = n_vars_;
      for (std::size_t k = 0; k < n_vars_; ++k) {
        const std::size_t v = order_[k];
        if (is_basic[v]) continue;
        column_rows(v, rows);
        double rc = column_cost(v, phase_one);
        for (int r : rows) rc -= y[r];
        if (rc < -enter_tol) {
          entering = v;
          break;
        }
      }
      if (entering == n_vars_) return;

      column_rows(entering, rows);
      Eigen::VectorXd direction = Eigen::VectorXd::Zero(rows_);
      for (int r : rows) direction += basis_inverse_.col(r);

      // Leaving: Bland on the minimum ratio, ties by scan position.
      int leaving = -1;
      double theta = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        if (direction[r] <= 1e-11) continue;
        const double ratio = x_basic_[r] / direction[r];
        if (ratio < theta - 1e-13 ||
            (ratio < theta + 1e-13 &&
             (leaving < 0 ||
              variable_position(basic_vars_[static_cast<std::size_t>(r)]) <
                  variable_position(basic_vars_[static_cast<std::size_t>(leaving)])))) {
          theta = ratio;
          leaving = r;
        }
      }
      if (leaving < 0)
        throw std::runtime_error("transport LP: unbounded direction (internal error)");

      pivot(leaving, direction, theta);
      is_basic[basic_vars_[static_cast<std::size_t>(leaving)]] = 0;
      is_basic[entering] = 1;
      basic_vars_[static_cast<std::size_t>(leaving)] = entering;

      if (iterations_ % 64 == 0) x_basic_ = basis_inverse_ * rhs_;
    }
  }

  void pivot(int leaving, const Eigen::VectorXd& direction, double theta) {
    const double pivot_val = direction[leaving];
    x_basic_ -= theta * direction;
    x_basic_[leaving] = theta;
    for (int r = 0; r < rows_; ++r) x_basic_[r] = std::max(x_basic_[r], 0.0);

    Eigen::RowVectorXd pivot_row = basis_inverse_.row(leaving) / pivot_val;
    for (int r = 0; r < rows_; ++r) {
      if (r == leaving) continue;
      const double factor = direction[r];
      if (factor != 0.0) basis_inverse_.row(r) -= factor * pivot_row;
    }
    basis_inverse_.row(leaving) = pivot_row;
  }

  // Degenerate-level artificials left after phase one are pivoted out on any
  // real column with a nonzero element in their row.
  void expel_artificials() {
    std::vector<int> rows;
    for (int r = 0; r < rows_; ++r) {
      if (basic_vars_[static_cast<std::size_t>(r)] < n_vars_) continue;
      bool replaced = false;
      for (std::size_t v = 0; v < n_vars_ && !replaced; ++v) {
        bool in_basis = false;
        for (int rr = 0; rr < rows_; ++rr)
          if (basic_vars_[static_cast<std::size_t>(rr)] == v) { in_basis = true; break; }
        if (in_basis) continue;
        column_rows(v, rows);
        double element = 0.0;
        for (int rr : rows) element += basis_inverse_(r, rr);
        if (std::abs(element) > 1e-9) {
          Eigen::VectorXd direction = Eigen::VectorXd::Zero(rows_);
          for (int rr : rows) direction += basis_inverse_.col(rr);
          pivot(r, direction, x_basic_[r] / direction[r]);
          basic_vars_[static_cast<std::size_t>(r)] = v;
          replaced = true;
        }
      }
      if (!replaced)
        throw std::runtime_error("transport LP: rank-deficient constraint rows "
                                 "(internal error)");
    }
    x_basic_ = basis_inverse_ * rhs_;
    for (int r = 0; r < rows_; ++r) x_basic_[r] = std::max(x_basic_[r], 0.0);
  }

  LpSolution extract() {
    LpSolution sol;
    x_basic_ = basis_inverse_ * rhs_;
    for (int r = 0; r < rows_; ++r) {
      const std::size_t v = basic_vars_[static_cast<std::size_t>(r)];
      if (v >= n_vars_)
        throw std::runtime_error("transport LP: artificial variable left in the basis");
      sol.basis.push_back(v);
      const double mass = x_basic_[r];
      // Roundoff-level masses are dropped; the marginal error stays far
      // below feas_tol.
      if (mass <= 1e-12) continue;
      sol.coupling.entries[inst_.unflatten(v)] = mass;
    }
    double obj = 0.0;
    for (const auto& [idx, mass] : sol.coupling.entries)
      obj += mass * cost_[inst_.flatten(idx)];
    sol.coupling.objective = obj;

    sol.dual = certificate_from_multipliers(inst_, row_offset_, multipliers(false));
    sol.iterations = iterations_;
    return sol;
  }

  // Artificials sort after every real variable.
  std::size_t variable_position(std::size_t v) const {
    return v < n_vars_ ? position_[v] : n_vars_ + (v - n_vars_);
  }

  double max_abs_cost() const {
    double m = 0.0;
    for (double c : cost_) m = std::max(m, std::abs(c));
    return m;
  }

  const Instance& inst_;
  const std::vector<double>& cost_;
  std::vector<int> row_offset_;
  int rows_ = 0;
  std::size_t n_vars_ = 0;
  Eigen::VectorXd rhs_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> position_;
  Eigen::MatrixXd basis_inverse_;
  std::vector<std::size_t> basic_vars_;
  Eigen::VectorXd x_basic_;
  int iterations_ = 0;
  const int iteration_cap_ = 200000;
};

}  // namespace

LpSolution solve_lp(const Instance& inst) {
  return solve_lp_with_objective(inst, inst.cost_tensor);
}

LpSolution solve_lp_with_objective(const Instance& inst,
                                   const std::vector<double>& objective,
                                   const std::vector<std::size_t>& scan_order) {
  if (objective.size() != inst.tensor_size())
    throw std::invalid_argument("solve_lp: objective size mismatch");
  TransportSimplex simplex(inst, objective, scan_order);
  return simplex.solve();
}

DualCertificate price_basis(const Instance& inst, const std::vector<double>& objective,
                            const std::vector<std::size_t>& basis) {
  if (objective.size() != inst.tensor_size())
    throw std::invalid_argument("price_basis: objective size mismatch");
  int rows = 0;
  const std::vector<int> offsets = kept_row_offsets(inst, &rows);
  if (static_cast<int>(basis.size()) != rows)
    throw std::invalid_argument("price_basis: basis size mismatch");
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(rows, rows);
  Eigen::VectorXd cb(rows);
  std::vector<int> hit;
  for (int c = 0; c < rows; ++c) {
    tuple_column_rows(inst, offsets, basis[static_cast<std::size_t>(c)], hit);
    for (int r : hit) b(r, c) = 1.0;
    cb[c] = objective[basis[static_cast<std::size_t>(c)]];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(b.transpose());
  if (!lu.isInvertible())
    throw std::invalid_argument("price_basis: the given columns do not form a basis");
  return certificate_from_multipliers(inst, offsets, lu.solve(cb));
}

// ---------------------------------------------------------------------------
// Entropic solver

EntropicSolution solve_entropic(const Instance& inst, double epsilon, int max_iters,
                                double tol) {
  if (epsilon <= 0.0) throw std::invalid_argument("solve_entropic: epsilon must be > 0");
  if (max_iters < 1) throw std::invalid_argument("solve_entropic: max_iters must be >= 1");
  const int m = inst.marginal_count();
  const std::size_t total = inst.tensor_size();

  std::vector<Eigen::VectorXd> log_scaling(static_cast<std::size_t>(m));
  std::vector<Eigen::VectorXd> log_weights(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto& w = inst.marginals[static_cast<std::size_t>(i)].weights;
    log_scaling[static_cast<std::size_t>(i)] =
        Eigen::VectorXd::Zero(inst.sizes[static_cast<std::size_t>(i)]);
    Eigen::VectorXd lw(w.size());
    for (int k = 0; k < w.size(); ++k)
      lw[k] = (w[k] > 0.0) ? std::log(w[k]) : -std::numeric_limits<double>::infinity();
    log_weights[static_cast<std::size_t>(i)] = lw;
  }

  // skip_axis < 0 gives the full log plan entry; otherwise the scaling of
  // that axis is left out (used in the axis update, avoids inf - inf).
  const auto log_plan_entry = [&](std::size_t flat, int skip_axis) {
    std::size_t rem = flat;
    double l = -inst.cost_tensor[flat] / epsilon;
    for (int i = m - 1; i >= 0; --i) {
      const int k = static_cast<int>(rem % static_cast<std::size_t>(
                                               inst.sizes[static_cast<std::size_t>(i)]));
      rem /= static_cast<std::size_t>(inst.sizes[static_cast<std::size_t>(i)]);
      if (i != skip_axis) l += log_scaling[static_cast<std::size_t>(i)][k];
    }
    return l;
  };

  const auto axis_index = [&](std::size_t flat, int axis) {
    std::size_t rem = flat;
    for (int i = m - 1; i > axis; --i)
      rem /= static_cast<std::size_t>(inst.sizes[static_cast<std::size_t>(i)]);
    return static_cast<int>(rem % static_cast<std::size_t>(
                                      inst.sizes[static_cast<std::size_t>(axis)]));
  };

  EntropicSolution out;
  int cycle = 0;
  for (; cycle < max_iters; ++cycle) {
    for (int axis = 0; axis < m; ++axis) {
      const int n = inst.sizes[static_cast<std::size_t>(axis)];
      // Two-pass logsumexp of the complementary sum per grid point.
      Eigen::VectorXd peak = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
      for (std::size_t flat = 0; flat < total; ++flat) {
        const int k = axis_index(flat, axis);
        peak[k] = std::max(peak[k], log_plan_entry(flat, axis));
      }
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
      for (std::size_t flat = 0; flat < total; ++flat) {
        const int k = axis_index(flat, axis);
        if (!std::isfinite(peak[k])) continue;
        acc[k] += std::exp(log_plan_entry(flat, axis) - peak[k]);
      }
      for (int k = 0; k < n; ++k) {
        if (!std::isfinite(log_weights[static_cast<std::size_t>(axis)][k])) {
          log_scaling[static_cast<std::size_t>(axis)][k] =
              -std::numeric_limits<double>::infinity();
        } else {
          log_scaling[static_cast<std::size_t>(axis)][k] =
              log_weights[static_cast<std::size_t>(axis)][k] - peak[k] - std::log(acc[k]);
        }
      }
    }

    // Worst TV marginal error of the current plan.
    double worst = 0.0;
    for (int axis = 0; axis < m; ++axis) {
      Eigen::VectorXd marg =
          Eigen::VectorXd::Zero(inst.sizes[static_cast<std::size_t>(axis)]);
      for (std::size_t flat = 0; flat < total; ++flat) {
        const double l = log_plan_entry(flat, -1);
        if (std::isfinite(l)) marg[axis_index(flat, axis)] += std::exp(l);
      }
      worst = std::max(
          worst, 0.5 * (marg - inst.marginals[static_cast<std::size_t>(axis)].weights)
                           .cwiseAbs()
                           .sum());
    }
    out.marginal_error = worst;
    if (worst <= tol) {
      out.converged = true;
      ++cycle;
      break;
    }
  }
  out.iterations = cycle;

  double obj = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    const double l = log_plan_entry(flat, -1);
    if (!std::isfinite(l)) continue;
    const double mass = std::exp(l);
    if (mass <= 0.0) continue;
    out.coupling.entries[inst.unflatten(flat)] = mass;
    obj += mass * inst.cost_tensor[flat];
  }
  out.coupling.objective = obj;
  return out;
}

// ---------------------------------------------------------------------------
// Brute force over permutation tuples

MongeSolution brute_force_monge(const Instance& inst, std::size_t work_cap) {
  const int m = inst.marginal_count();
  const int n = inst.sizes[0];
  for (int i = 0; i < m; ++i) {
    if (inst.sizes[static_cast<std::size_t>(i)] != n)
      throw std::invalid_argument("brute_force_monge: marginals must share one size");
    const auto& w = inst.marginals[static_cast<std::size_t>(i)].weights;
    for (int k = 0; k < n; ++k)
      if (std::abs(w[k] - 1.0 / n) > 1e-12)
        throw std::invalid_argument("brute_force_monge: marginals must be uniform");
  }

  double permutations = 1.0;
  for (int k = 2; k <= n; ++k) permutations *= k;
  double work = static_cast<double>(n);
  for (int i = 1; i < m; ++i) work *= permutations;
  if (work > static_cast<double>(work_cap))
    throw std::invalid_argument("brute_force_monge: enumeration exceeds the work cap");

  std::vector<std::vector<int>> perms(static_cast<std::size_t>(m - 1));
  for (auto& p : perms) {
    p.resize(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
  }

  MongeSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(m));
  bool done = false;
  while (!done) {
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      idx[0] = k;
      for (int i = 1; i < m; ++i)
        idx[static_cast<std::size_t>(i)] =
            perms[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)];
      total += inst.cost_at(idx);
    }
    if (total < best.objective) {
      best.objective = total;
      best.maps = perms;
    }
    // Lexicographic odometer over the permutation tuple.
    int axis = m - 2;
    for (; axis >= 0; --axis) {
      if (std::next_permutation(perms[static_cast<std::size_t>(axis)].begin(),
                                perms[static_cast<std::size_t>(axis)].end()))
        break;
      // next_permutation already reset it to the identity.
    }
    done = (axis < 0);
  }
  best.objective /= n;
  return best;
}

Coupling coupling_from_maps(const Instance& inst,
                            const std::vector<std::vector<int>>& maps) {
  const int m = inst.marginal_count();
  if (static_cast<int>(maps.size()) != m - 1)
    throw std::invalid_argument("coupling_from_maps: expected one map per target marginal");
  Coupling coupling;
  std::vector<int> idx(static_cast<std::size_t>(m));
  for (int k = 0; k < inst.sizes[0]; ++k) {
    const double mass = inst.marginals[0].weights[k];
    if (mass <= 0.0) continue;
    idx[0] = k;
    for (int i = 1; i < m; ++i)
      idx[static_cast<std::size_t>(i)] =
          maps[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)];
    coupling.entries[idx] += mass;
    coupling.objective += mass * inst.cost_at(idx);
  }
  return coupling;
}

}  // namespace mmot
