#include "mmot/costs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace mmot {

namespace {

double fd_step(double coord) {
  static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * (1.0 + std::abs(coord));
}

// Second differences divide by h^2, so the roundoff/truncation balance sits
// at the quarter root of machine epsilon.
double fd_step2(double coord) {
  static const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  return h0 * (1.0 + std::abs(coord));
}

}  // namespace

CostModel::CostModel(std::vector<int> dims, bool analytic_gradient, bool analytic_second)
    : dims_(std::move(dims)),
      analytic_gradient_(analytic_gradient),
      analytic_second_(analytic_second) {
  if (dims_.size() < 2)
    throw std::invalid_argument("CostModel: needs at least two marginals");
  for (int d : dims_)
    if (d < 1) throw std::invalid_argument("CostModel: dimensions must be positive");
}

void CostModel::check_compatible(const Configuration& x) const {
  if (x.marginal_count() != marginal_count())
    throw std::invalid_argument("configuration has " + std::to_string(x.marginal_count()) +
                                " coordinates, cost expects " +
                                std::to_string(marginal_count()));
  for (int i = 0; i < marginal_count(); ++i)
    if (static_cast<int>(x.coords[i].size()) != dims_[i])
      throw std::invalid_argument("coordinate " + std::to_string(i) +
                                  " has wrong dimension");
}

void CostModel::check_index(int i) const {
  if (i < 0 || i >= marginal_count())
    throw std::invalid_argument("marginal index " + std::to_string(i) + " out of range");
}

double CostModel::value(const Configuration& x) const {
  check_compatible(x);
  return value_impl(x);
}

Eigen::VectorXd CostModel::gradient(int i, const Configuration& x) const {
  check_index(i);
  check_compatible(x);
  if (analytic_gradient_) return gradient_impl(i, x);
  return fd_gradient(i, x);
}

DifferentialBlock CostModel::second_differential(int i, int j, const Configuration& x) const {
  check_index(i);
  check_index(j);
  check_compatible(x);
  DifferentialBlock block;
  block.i = i;
  block.j = j;
  block.matrix = analytic_second_ ? second_impl(i, j, x) : fd_second(i, j, x);
  if (i == j) {
    const double scale = std::max(1.0, block.matrix.cwiseAbs().maxCoeff());
    if ((block.matrix - block.matrix.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
      throw std::runtime_error("hessian block is not symmetric within tolerance");
  }
  return block;
}

Eigen::VectorXd CostModel::gradient_impl(int, const Configuration&) const {
  throw std::logic_error("analytic gradient not implemented");
}

Eigen::MatrixXd CostModel::second_impl(int, int, const Configuration&) const {
  throw std::logic_error("analytic second differential not implemented");
}

Eigen::VectorXd CostModel::fd_gradient(int i, const Configuration& x) const {
  check_index(i);
  check_compatible(x);
  Configuration probe = x;
  Eigen::VectorXd g(dims_[i]);
  for (int a = 0; a < dims_[i]; ++a) {
    const double base = x.coords[i][a];
    const double h = fd_step(base);
    probe.coords[i][a] = base + h;
    const double fwd = value_impl(probe);
    probe.coords[i][a] = base - h;
    const double bwd = value_impl(probe);
    probe.coords[i][a] = base;
    g[a] = (fwd - bwd) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd CostModel::fd_second(int i, int j, const Configuration& x) const {
  check_index(i);
  check_index(j);
  check_compatible(x);
  Configuration probe = x;
  Eigen::MatrixXd block(dims_[i], dims_[j]);
  const double f0 = (i == j) ? value_impl(x) : 0.0;
  for (int a = 0; a < dims_[i]; ++a) {
    const double xa = x.coords[i][a];
    const double ha = fd_step2(xa);
    for (int b = 0; b < dims_[j]; ++b) {
      if (i == j && a == b) {
        probe.coords[i][a] = xa + ha;
        const double fwd = value_impl(probe);
        probe.coords[i][a] = xa - ha;
        const double bwd = value_impl(probe);
        probe.coords[i][a] = xa;
        block(a, a) = (fwd - 2.0 * f0 + bwd) / (ha * ha);
        continue;
      }
      const double xb = x.coords[j][b];
      const double hb = fd_step2(xb);
      probe.coords[i][a] = xa + ha;
      probe.coords[j][b] = xb + hb;
      const double pp = value_impl(probe);
      probe.coords[j][b] = xb - hb;
      const double pm = value_impl(probe);
      probe.coords[i][a] = xa - ha;
      const double mm = value_impl(probe);
      probe.coords[j][b] = xb + hb;
      const double mp = value_impl(probe);
      probe.coords[i][a] = xa;
      probe.coords[j][b] = xb;
      block(a, b) = (pp - pm - mp + mm) / (4.0 * ha * hb);
    }
  }
  return block;
}

// --------------------------------------------------------------------------
// Concave of sum

double NegSquaredNorm::value(const Eigen::VectorXd& s) const {
  return -scale_ * s.squaredNorm();
}

Eigen::VectorXd NegSquaredNorm::grad(const Eigen::VectorXd& s) const {
  return -2.0 * scale_ * s;
}

Eigen::MatrixXd NegSquaredNorm::hess(const Eigen::VectorXd& s) const {
  return -2.0 * scale_ * Eigen::MatrixXd::Identity(s.size(), s.size());
}

SinePerturbedProfile::SinePerturbedProfile(std::shared_ptr<const SumProfile> base,
                                           double epsilon, Eigen::VectorXd frequency,
                                           double phase)
    : base_(std::move(base)), epsilon_(epsilon), frequency_(std::move(frequency)),
      phase_(phase) {
  if (!base_) throw std::invalid_argument("SinePerturbedProfile: null base profile");
}

double SinePerturbedProfile::value(const Eigen::VectorXd& s) const {
  return base_->value(s) + epsilon_ * std::sin(frequency_.dot(s) + phase_);
}

Eigen::VectorXd SinePerturbedProfile::grad(const Eigen::VectorXd& s) const {
  return base_->grad(s) + epsilon_ * std::cos(frequency_.dot(s) + phase_) * frequency_;
}

Eigen::MatrixXd SinePerturbedProfile::hess(const Eigen::VectorXd& s) const {
  return base_->hess(s) - epsilon_ * std::sin(frequency_.dot(s) + phase_) *
                              (frequency_ * frequency_.transpose());
}

ConcaveOfSumCost::ConcaveOfSumCost(int m, int n, std::shared_ptr<const SumProfile> profile)
    : CostModel(std::vector<int>(static_cast<std::size_t>(m), n), true, true),
      profile_(std::move(profile)) {
  if (!profile_) throw std::invalid_argument("ConcaveOfSumCost: null profile");
}

Eigen::VectorXd ConcaveOfSumCost::coordinate_sum(const Configuration& x) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim(0));
  for (const auto& c : x.coords) s += c;
  return s;
}

double ConcaveOfSumCost::value_impl(const Configuration& x) const {
  return profile_->value(coordinate_sum(x));
}

Eigen::VectorXd ConcaveOfSumCost::gradient_impl(int, const Configuration& x) const {
  return profile_->grad(coordinate_sum(x));
}

Eigen::MatrixXd ConcaveOfSumCost::second_impl(int, int, const Configuration& x) const {
  return profile_->hess(coordinate_sum(x));
}

// --------------------------------------------------------------------------
// Bilinear

BilinearCost::BilinearCost(std::vector<int> dims, const std::vector<Term>& terms)
    : CostModel(dims, true, true) {
  for (const Term& t : terms) {
    check_index(t.i);
    check_index(t.j);
    if (t.i == t.j)
      throw std::invalid_argument("BilinearCost: diagonal term (" + std::to_string(t.i) +
                                  "," + std::to_string(t.i) + ") not allowed");
    const int i = std::min(t.i, t.j);
    const int j = std::max(t.i, t.j);
    // A term written for (j, i) contributes x_j^T A x_i = x_i^T A^T x_j.
    Eigen::MatrixXd m = t.matrix;
    if (t.i > t.j) m = t.matrix.transpose();
    if (m.rows() != dim(i) || m.cols() != dim(j))
      throw std::invalid_argument("BilinearCost: term (" + std::to_string(t.i) + "," +
                                  std::to_string(t.j) + ") has wrong shape");
    auto [it, inserted] = blocks_.try_emplace({i, j}, m);
    if (!inserted) it->second += m;
  }
  for (int i = 0; i < marginal_count(); ++i)
    for (int j = i + 1; j < marginal_count(); ++j)
      blocks_.try_emplace({i, j}, Eigen::MatrixXd::Zero(dim(i), dim(j)));
}

std::shared_ptr<BilinearCost> BilinearCost::normal_form(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("BilinearCost::normal_form: A must be square");
  const int n = static_cast<int>(A.rows());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  std::vector<Term> terms = {{0, 1, id}, {0, 2, id}, {1, 2, A}};
  return std::make_shared<BilinearCost>(std::vector<int>{n, n, n}, terms);
}

const Eigen::MatrixXd& BilinearCost::block(int i, int j) const {
  return blocks_.at({i, j});
}

double BilinearCost::value_impl(const Configuration& x) const {
  double v = 0.0;
  for (const auto& [key, m] : blocks_)
    v += x.coords[key.first].dot(m * x.coords[key.second]);
  return v;
}

Eigen::VectorXd BilinearCost::gradient_impl(int i, const Configuration& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim(i));
  for (const auto& [key, m] : blocks_) {
    if (key.first == i) g += m * x.coords[key.second];
    if (key.second == i) g += m.transpose() * x.coords[key.first];
  }
  return g;
}

Eigen::MatrixXd BilinearCost::second_impl(int i, int j, const Configuration&) const {
  if (i == j) return Eigen::MatrixXd::Zero(dim(i), dim(i));
  if (i < j) return blocks_.at({i, j});
  return blocks_.at({j, i}).transpose();
}

// --------------------------------------------------------------------------
// g + quadratic

QuadraticDifference::QuadraticDifference(Eigen::MatrixXd q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols())
    throw std::invalid_argument("QuadraticDifference: Q must be square");
  if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q_.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("QuadraticDifference: Q must be symmetric");
}

double QuadraticDifference::value(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const Eigen::VectorXd d = a - b;
  return 0.5 * d.dot(q_ * d);
}

Eigen::VectorXd QuadraticDifference::grad_a(const Eigen::VectorXd& a,
                                            const Eigen::VectorXd& b) const {
  return q_ * (a - b);
}

Eigen::VectorXd QuadraticDifference::grad_b(const Eigen::VectorXd& a,
                                            const Eigen::VectorXd& b) const {
  return -(q_ * (a - b));
}

Eigen::MatrixXd QuadraticDifference::d2_ab(const Eigen::VectorXd&,
                                           const Eigen::VectorXd&) const {
  return -q_;
}

Eigen::MatrixXd QuadraticDifference::hess_a(const Eigen::VectorXd&,
                                            const Eigen::VectorXd&) const {
  return q_;
}

Eigen::MatrixXd QuadraticDifference::hess_b(const Eigen::VectorXd&,
                                            const Eigen::VectorXd&) const {
  return q_;
}

GPlusQuadraticCost::GPlusQuadraticCost(int n, std::shared_ptr<const PairInteraction> g)
    : CostModel(std::vector<int>{n, n, n}, true, true), g_(std::move(g)) {
  if (!g_) throw std::invalid_argument("GPlusQuadraticCost: null interaction");
}

double GPlusQuadraticCost::value_impl(const Configuration& x) const {
  const auto& x0 = x.coords[0];
  const auto& x1 = x.coords[1];
  const auto& x2 = x.coords[2];
  return g_->value(x0, x2) + 0.5 * (x0 - x1).squaredNorm() + 0.5 * (x2 - x1).squaredNorm();
}

Eigen::VectorXd GPlusQuadraticCost::gradient_impl(int i, const Configuration& x) const {
  const auto& x0 = x.coords[0];
  const auto& x1 = x.coords[1];
  const auto& x2 = x.coords[2];
  switch (i) {
    case 0: return g_->grad_a(x0, x2) + (x0 - x1);
    case 1: return (x1 - x0) + (x1 - x2);
    default: return g_->grad_b(x0, x2) + (x2 - x1);
  }
}

Eigen::MatrixXd GPlusQuadraticCost::second_impl(int i, int j, const Configuration& x) const {
  const int n = dim(0);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const auto& x0 = x.coords[0];
  const auto& x2 = x.coords[2];
  if (i == j) {
    if (i == 0) return g_->hess_a(x0, x2) + id;
    if (i == 1) return 2.0 * id;
    return g_->hess_b(x0, x2) + id;
  }
  const int lo = std::min(i, j), hi = std::max(i, j);
  Eigen::MatrixXd block;
  if (lo == 0 && hi == 1) block = -id;
  else if (lo == 1 && hi == 2) block = -id;
  else block = g_->d2_ab(x0, x2);
  return (i < j) ? block : Eigen::MatrixXd(block.transpose());
}

// --------------------------------------------------------------------------
// Hedonic

AffineQuadraticComponent::AffineQuadraticComponent(Eigen::MatrixXd P, Eigen::VectorXd q,
                                                   Eigen::MatrixXd B, Eigen::VectorXd b,
                                                   Eigen::MatrixXd L, Eigen::VectorXd l)
    : P_(std::move(P)), q_(std::move(q)), B_(std::move(B)), b_(std::move(b)),
      L_(std::move(L)), l_(std::move(l)) {
  const auto nx = P_.rows();
  const auto nz = P_.cols();
  if (q_.size() != nx || B_.rows() != nx || B_.cols() != nx || b_.size() != nx ||
      L_.rows() != nz || L_.cols() != nz || l_.size() != nz)
    throw std::invalid_argument("AffineQuadraticComponent: inconsistent shapes");
}

std::shared_ptr<AffineQuadraticComponent> AffineQuadraticComponent::squared_distance(int n) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  return std::make_shared<AffineQuadraticComponent>(-id, zero, id, zero, id, zero);
}

double AffineQuadraticComponent::value(const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& z) const {
  return x.dot(P_ * z + q_) + 0.5 * x.dot(B_ * x) + b_.dot(x) + 0.5 * z.dot(L_ * z) +
         l_.dot(z);
}

Eigen::VectorXd AffineQuadraticComponent::grad_x(const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& z) const {
  return P_ * z + q_ + B_ * x + b_;
}

Eigen::VectorXd AffineQuadraticComponent::grad_z(const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& z) const {
  return P_.transpose() * x + L_ * z + l_;
}

Eigen::MatrixXd AffineQuadraticComponent::d2_xz(const Eigen::VectorXd&,
                                                const Eigen::VectorXd&) const {
  return P_;
}

Eigen::MatrixXd AffineQuadraticComponent::d2_zz(const Eigen::VectorXd&,
                                                const Eigen::VectorXd&) const {
  return L_;
}

Eigen::MatrixXd AffineQuadraticComponent::hess_x(const Eigen::VectorXd&,
                                                 const Eigen::VectorXd&) const {
  return B_;
}

HedonicCost::HedonicCost(std::vector<int> dims, DomainBox z_domain,
                         std::vector<std::shared_ptr<const HedonicComponent>> components,
                         HedonicInnerOptions options)
    : CostModel(dims, true, true), z_domain_(std::move(z_domain)),
      components_(std::move(components)), options_(options) {
  if (components_.size() != static_cast<std::size_t>(marginal_count()))
    throw std::invalid_argument("HedonicCost: one component per marginal required");
  for (const auto& c : components_)
    if (!c) throw std::invalid_argument("HedonicCost: null component");
  if (options_.grid_points < 2)
    throw std::invalid_argument("HedonicCost: grid_points must be >= 2");
}

double HedonicCost::inner_objective(const Configuration& x, const Eigen::VectorXd& z) const {
  double v = 0.0;
  for (int i = 0; i < marginal_count(); ++i) v += components_[i]->value(x.coords[i], z);
  return v;
}

Eigen::VectorXd HedonicCost::inner_gradient(const Configuration& x,
                                            const Eigen::VectorXd& z) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(z_domain_.dim());
  for (int i = 0; i < marginal_count(); ++i) g += components_[i]->grad_z(x.coords[i], z);
  return g;
}

Eigen::MatrixXd HedonicCost::inner_hessian(const Configuration& x,
                                           const Eigen::VectorXd& z) const {
  const int nz = z_domain_.dim();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nz, nz);
  for (int i = 0; i < marginal_count(); ++i) a += components_[i]->d2_zz(x.coords[i], z);
  return a;
}

Eigen::VectorXd HedonicCost::refine(const Configuration& x, Eigen::VectorXd z) const {
  for (int it = 0; it < options_.newton_max_iters; ++it) {
    const Eigen::VectorXd g = inner_gradient(x, z);
    if (g.norm() <= options_.newton_tol) return z;
    const Eigen::MatrixXd a = inner_hessian(x, z);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
      throw std::runtime_error("hedonic inner minimization: singular curvature");
    z -= lu.solve(g);
  }
  if (inner_gradient(x, z).norm() > options_.newton_tol)
    throw std::runtime_error("hedonic inner minimization failed to converge");
  return z;
}

Eigen::VectorXd HedonicCost::inner_minimizer(const Configuration& x) const {
  check_compatible(x);
  const int nz = z_domain_.dim();
  const int g = options_.grid_points;

  // Multi-start grid scan.
  std::vector<int> idx(nz, 0);
  double best = std::numeric_limits<double>::infinity();
  double second = best;
  Eigen::VectorXd best_z(nz), second_z(nz);
  bool done = false;
  while (!done) {
    Eigen::VectorXd z(nz);
    for (int k = 0; k < nz; ++k)
      z[k] = z_domain_.lower[k] + z_domain_.side(k) * idx[k] / (g - 1);
    const double v = inner_objective(x, z);
    if (v < best) {
      second = best;
      second_z = best_z;
      best = v;
      best_z = z;
    } else if (v < second) {
      second = v;
      second_z = z;
    }
    int k = 0;
    for (; k < nz; ++k) {
      if (++idx[k] < g) break;
      idx[k] = 0;
    }
    done = (k == nz);
  }

  Eigen::VectorXd zhat = refine(x, best_z);
  if (!z_domain_.contains(zhat))
    throw std::runtime_error("hedonic inner minimizer left the z domain");

  double diameter = 0.0;
  for (int k = 0; k < nz; ++k) diameter += z_domain_.side(k) * z_domain_.side(k);
  diameter = std::sqrt(diameter);
  if (std::isfinite(second)) {
    Eigen::VectorXd z2 = refine(x, second_z);
    const double v2 = inner_objective(x, z2);
    const bool same_minimizer = (z2 - zhat).norm() <= options_.coincidence_radius * diameter;
    if (!same_minimizer && v2 < inner_objective(x, zhat) + options_.separation_tol)
      throw std::runtime_error("hedonic inner minimizer is not unique");
  }

  const Eigen::MatrixXd a = inner_hessian(x, zhat);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()));
  if (eig.eigenvalues().minCoeff() <= options_.definiteness_tol)
    throw std::runtime_error("hedonic inner curvature is not positive definite");

  return zhat;
}

double HedonicCost::value_impl(const Configuration& x) const {
  return inner_objective(x, inner_minimizer(x));
}

Eigen::VectorXd HedonicCost::gradient_impl(int i, const Configuration& x) const {
  const Eigen::VectorXd z = inner_minimizer(x);
  return components_[i]->grad_x(x.coords[i], z);
}

Eigen::MatrixXd HedonicCost::second_impl(int i, int j, const Configuration& x) const {
  const Eigen::VectorXd z = inner_minimizer(x);
  const Eigen::MatrixXd a = inner_hessian(x, z);
  const Eigen::MatrixXd ei = components_[i]->d2_xz(x.coords[i], z);
  Eigen::LLT<Eigen::MatrixXd> chol(0.5 * (a + a.transpose()));
  if (chol.info() != Eigen::Success)
    throw std::runtime_error("hedonic inner curvature is not positive definite");
  const Eigen::MatrixXd ej = components_[j]->d2_xz(x.coords[j], z);
  Eigen::MatrixXd block = -ei * chol.solve(ej.transpose());
  if (i == j) block += components_[i]->hess_x(x.coords[i], z);
  return block;
}

// --------------------------------------------------------------------------
// Hooks and wrappers

CallbackCost::CallbackCost(std::vector<int> dims, ValueFn value, GradientFn gradient)
    : CostModel(std::move(dims), static_cast<bool>(gradient), false),
      value_(std::move(value)), gradient_(std::move(gradient)) {
  if (!value_) throw std::invalid_argument("CallbackCost: null value callback");
}

double CallbackCost::value_impl(const Configuration& x) const { return value_(x); }

Eigen::VectorXd CallbackCost::gradient_impl(int i, const Configuration& x) const {
  return gradient_(i, x);
}

PerturbedCost::PerturbedCost(std::shared_ptr<const CostModel> base,
                             std::shared_ptr<const CostModel> perturbation, double epsilon)
    : CostModel(base ? base->dims() : std::vector<int>{},
                base && perturbation && base->has_analytic_gradient() &&
                    perturbation->has_analytic_gradient(),
                base && perturbation && base->has_analytic_second() &&
                    perturbation->has_analytic_second()),
      base_(std::move(base)), perturbation_(std::move(perturbation)), epsilon_(epsilon) {
  if (!base_ || !perturbation_)
    throw std::invalid_argument("PerturbedCost: null component");
  if (perturbation_->dims() != base_->dims())
    throw std::invalid_argument("PerturbedCost: dimension mismatch");
}

double PerturbedCost::value_impl(const Configuration& x) const {
  return base_->value(x) + epsilon_ * perturbation_->value(x);
}

Eigen::VectorXd PerturbedCost::gradient_impl(int i, const Configuration& x) const {
  return base_->gradient(i, x) + epsilon_ * perturbation_->gradient(i, x);
}

Eigen::MatrixXd PerturbedCost::second_impl(int i, int j, const Configuration& x) const {
  return base_->second_differential(i, j, x).matrix +
         epsilon_ * perturbation_->second_differential(i, j, x).matrix;
}

FiniteDifferenceView::FiniteDifferenceView(std::shared_ptr<const CostModel> inner)
    : CostModel(inner ? inner->dims() : std::vector<int>{}, false, false),
      inner_(std::move(inner)) {
  if (!inner_) throw std::invalid_argument("FiniteDifferenceView: null inner cost");
}

double FiniteDifferenceView::value_impl(const Configuration& x) const {
  return inner_->value(x);
}

}  // namespace mmot
