#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "mmot/geometry.hpp"

namespace mmot {

// Mixed (i != j) or unmixed (i == j) block of second partials of a cost,
// rows indexed by marginal i, columns by marginal j.
struct DifferentialBlock {
  int i = 0;
  int j = 0;
  Eigen::MatrixXd matrix;

  bool is_hessian() const { return i == j; }
};

// Cost function on the product of marginal domains, with first and second
// differentials. Families without analytic formulas fall back to central
// finite differences (step cbrt(machine eps) scaled by 1 + |coordinate|).
class CostModel {
 public:
  virtual ~CostModel() = default;

  int marginal_count() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  int dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }

  double value(const Configuration& x) const;
  Eigen::VectorXd gradient(int i, const Configuration& x) const;
  DifferentialBlock second_differential(int i, int j, const Configuration& x) const;

  bool has_analytic_gradient() const { return analytic_gradient_; }
  bool has_analytic_second() const { return analytic_second_; }

  // Finite-difference paths, always available; used as cross-check oracles.
  Eigen::VectorXd fd_gradient(int i, const Configuration& x) const;
  Eigen::MatrixXd fd_second(int i, int j, const Configuration& x) const;

 protected:
  CostModel(std::vector<int> dims, bool analytic_gradient, bool analytic_second);

  virtual double value_impl(const Configuration& x) const = 0;
  virtual Eigen::VectorXd gradient_impl(int i, const Configuration& x) const;
  virtual Eigen::MatrixXd second_impl(int i, int j, const Configuration& x) const;

  void check_compatible(const Configuration& x) const;
  void check_index(int i) const;

 private:
  std::vector<int> dims_;
  bool analytic_gradient_ = false;
  bool analytic_second_ = false;
};

// ---------------------------------------------------------------------------
// Family: concave functions of the sum, c(x_0..x_{m-1}) = h(sum_i x_i).

// h on R^n with differentials.
class SumProfile {
 public:
  virtual ~SumProfile() = default;
  virtual double value(const Eigen::VectorXd& s) const = 0;
  virtual Eigen::VectorXd grad(const Eigen::VectorXd& s) const = 0;
  virtual Eigen::MatrixXd hess(const Eigen::VectorXd& s) const = 0;
};

// h(s) = -scale * |s|^2
class NegSquaredNorm final : public SumProfile {
 public:
  explicit NegSquaredNorm(double scale = 1.0) : scale_(scale) {}
  double value(const Eigen::VectorXd& s) const override;
  Eigen::VectorXd grad(const Eigen::VectorXd& s) const override;
  Eigen::MatrixXd hess(const Eigen::VectorXd& s) const override;
  double scale() const { return scale_; }

 private:
  double scale_;
};

// base(s) + epsilon * sin(frequency . s + phase)
class SinePerturbedProfile final : public SumProfile {
 public:
  SinePerturbedProfile(std::shared_ptr<const SumProfile> base, double epsilon,
                       Eigen::VectorXd frequency, double phase);
  double value(const Eigen::VectorXd& s) const override;
  Eigen::VectorXd grad(const Eigen::VectorXd& s) const override;
  Eigen::MatrixXd hess(const Eigen::VectorXd& s) const override;

 private:
  std::shared_ptr<const SumProfile> base_;
  double epsilon_;
  Eigen::VectorXd frequency_;
  double phase_;
};

class ConcaveOfSumCost final : public CostModel {
 public:
  ConcaveOfSumCost(int m, int n, std::shared_ptr<const SumProfile> profile);

 protected:
  double value_impl(const Configuration& x) const override;
  Eigen::VectorXd gradient_impl(int i, const Configuration& x) const override;
  Eigen::MatrixXd second_impl(int i, int j, const Configuration& x) const override;

 private:
  Eigen::VectorXd coordinate_sum(const Configuration& x) const;
  std::shared_ptr<const SumProfile> profile_;
};

// ---------------------------------------------------------------------------
// Family: bilinear costs, c = sum_{i<j} x_i^T A_ij x_j. A term given for
// (j, i) with j > i is folded into the (i, j) slot as its transpose.

class BilinearCost final : public CostModel {
 public:
  struct Term {
    int i;
    int j;
    Eigen::MatrixXd matrix;  // dims[i] x dims[j]
  };

  BilinearCost(std::vector<int> dims, const std::vector<Term>& terms);

  // c(x1,x2,x3) = x1.x2 + x1.x3 + x2^T A x3 with all marginals of dim(A).
  static std::shared_ptr<BilinearCost> normal_form(const Eigen::MatrixXd& A);

  const Eigen::MatrixXd& block(int i, int j) const;  // i < j

 protected:
  double value_impl(const Configuration& x) const override;
  Eigen::VectorXd gradient_impl(int i, const Configuration& x) const override;
  Eigen::MatrixXd second_impl(int i, int j, const Configuration& x) const override;

 private:
  std::map<std::pair<int, int>, Eigen::MatrixXd> blocks_;  // keys i < j
};

// ---------------------------------------------------------------------------
// Family: three marginals, c = g(x_0, x_2) + |x_0 - x_1|^2/2 + |x_2 - x_1|^2/2.

// Pairwise interaction g(a, b) with differentials.
class PairInteraction {
 public:
  virtual ~PairInteraction() = default;
  virtual double value(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const = 0;
  virtual Eigen::VectorXd grad_a(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const = 0;
  virtual Eigen::VectorXd grad_b(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const = 0;
  // rows a, cols b
  virtual Eigen::MatrixXd d2_ab(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const = 0;
  virtual Eigen::MatrixXd hess_a(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const = 0;
  virtual Eigen::MatrixXd hess_b(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const = 0;
};

// g(a, b) = 0.5 (a-b)^T Q (a-b), Q symmetric positive definite.
class QuadraticDifference final : public PairInteraction {
 public:
  explicit QuadraticDifference(Eigen::MatrixXd q);
  double value(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const override;
  Eigen::VectorXd grad_a(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const override;
  Eigen::VectorXd grad_b(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const override;
  Eigen::MatrixXd d2_ab(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const override;
  Eigen::MatrixXd hess_a(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const override;
  Eigen::MatrixXd hess_b(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const override;
  const Eigen::MatrixXd& q() const { return q_; }

 private:
  Eigen::MatrixXd q_;
};

class GPlusQuadraticCost final : public CostModel {
 public:
  GPlusQuadraticCost(int n, std::shared_ptr<const PairInteraction> g);

 protected:
  double value_impl(const Configuration& x) const override;
  Eigen::VectorXd gradient_impl(int i, const Configuration& x) const override;
  Eigen::MatrixXd second_impl(int i, int j, const Configuration& x) const override;

 private:
  std::shared_ptr<const PairInteraction> g_;
};

// ---------------------------------------------------------------------------
// Family: hedonic costs, c(x) = inf_z sum_i f_i(x_i, z), differentials via
// the envelope formulas at the inner minimizer.

class HedonicComponent {
 public:
  virtual ~HedonicComponent() = default;
  virtual double value(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const = 0;
  virtual Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const = 0;
  virtual Eigen::VectorXd grad_z(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const = 0;
  // rows x, cols z
  virtual Eigen::MatrixXd d2_xz(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const = 0;
  virtual Eigen::MatrixXd d2_zz(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const = 0;
  virtual Eigen::MatrixXd hess_x(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const = 0;
};

// f(x, z) = x^T (P z + q) + 0.5 x^T B x + b^T x + 0.5 z^T L z + l^T z
class AffineQuadraticComponent final : public HedonicComponent {
 public:
  AffineQuadraticComponent(Eigen::MatrixXd P, Eigen::VectorXd q, Eigen::MatrixXd B,
                           Eigen::VectorXd b, Eigen::MatrixXd L, Eigen::VectorXd l);

  // f(x, z) = |x - z|^2 / 2
  static std::shared_ptr<AffineQuadraticComponent> squared_distance(int n);

  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override;
  Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override;
  Eigen::VectorXd grad_z(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override;
  Eigen::MatrixXd d2_xz(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override;
  Eigen::MatrixXd d2_zz(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override;
  Eigen::MatrixXd hess_x(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const override;

 private:
  Eigen::MatrixXd P_;
  Eigen::VectorXd q_;
  Eigen::MatrixXd B_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd l_;
};

struct HedonicInnerOptions {
  int grid_points = 33;            // per z dimension
  double newton_tol = 1e-12;       // on the inner gradient norm
  int newton_max_iters = 60;
  double separation_tol = 1e-9;    // minimum gap to a distinct second minimizer
  double definiteness_tol = 1e-10; // smallest eigenvalue of A must exceed this
  double coincidence_radius = 1e-6;  // relative to z-box diameter
};

class HedonicCost final : public CostModel {
 public:
  HedonicCost(std::vector<int> dims, DomainBox z_domain,
              std::vector<std::shared_ptr<const HedonicComponent>> components,
              HedonicInnerOptions options = {});

  // The attaining z for a given x tuple; throws on ambiguous or boundary minima.
  Eigen::VectorXd inner_minimizer(const Configuration& x) const;

  const DomainBox& z_domain() const { return z_domain_; }
  const HedonicComponent& component(int i) const { return *components_.at(i); }
  const HedonicInnerOptions& inner_options() const { return options_; }

 protected:
  double value_impl(const Configuration& x) const override;
  Eigen::VectorXd gradient_impl(int i, const Configuration& x) const override;
  Eigen::MatrixXd second_impl(int i, int j, const Configuration& x) const override;

 private:
  double inner_objective(const Configuration& x, const Eigen::VectorXd& z) const;
  Eigen::VectorXd inner_gradient(const Configuration& x, const Eigen::VectorXd& z) const;
  Eigen::MatrixXd inner_hessian(const Configuration& x, const Eigen::VectorXd& z) const;
  Eigen::VectorXd refine(const Configuration& x, Eigen::VectorXd z) const;

  DomainBox z_domain_;
  std::vector<std::shared_ptr<const HedonicComponent>> components_;
  HedonicInnerOptions options_;
};

// ---------------------------------------------------------------------------
// Host-language hooks and wrappers.

// Arbitrary value callback; differentials by finite differences unless a
// gradient callback is supplied.
class CallbackCost final : public CostModel {
 public:
  using ValueFn = std::function<double(const Configuration&)>;
  using GradientFn = std::function<Eigen::VectorXd(int, const Configuration&)>;

  CallbackCost(std::vector<int> dims, ValueFn value, GradientFn gradient = nullptr);

 protected:
  double value_impl(const Configuration& x) const override;
  Eigen::VectorXd gradient_impl(int i, const Configuration& x) const override;

 private:
  ValueFn value_;
  GradientFn gradient_;
};

// base + epsilon * perturbation, combining analytic differentials when both
// sides have them.
class PerturbedCost final : public CostModel {
 public:
  PerturbedCost(std::shared_ptr<const CostModel> base,
                std::shared_ptr<const CostModel> perturbation, double epsilon);

 protected:
  double value_impl(const Configuration& x) const override;
  Eigen::VectorXd gradient_impl(int i, const Configuration& x) const override;
  Eigen::MatrixXd second_impl(int i, int j, const Configuration& x) const override;

 private:
  std::shared_ptr<const CostModel> base_;
  std::shared_ptr<const CostModel> perturbation_;
  double epsilon_;
};

// Same values as the wrapped cost but with the analytic differential paths
// masked off; used to drive the finite-difference route end to end.
class FiniteDifferenceView final : public CostModel {
 public:
  explicit FiniteDifferenceView(std::shared_ptr<const CostModel> inner);

 protected:
  double value_impl(const Configuration& x) const override;

 private:
  std::shared_ptr<const CostModel> inner_;
};

}  // namespace mmot
