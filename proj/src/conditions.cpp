#include "mmot/conditions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mmot/rng.hpp"

namespace mmot {

namespace {

constexpr const char* kSamplingNote =
    "sampling evidence only; the condition is not proven over the whole domain";

void check_middle_arity(const CostModel& cost) {
  if (cost.marginal_count() < 3)
    throw std::invalid_argument("tensor operations need at least three marginals");
}

void check_domains(const CostModel& cost, const std::vector<DomainBox>& domains) {
  if (static_cast<int>(domains.size()) != cost.marginal_count())
    throw std::invalid_argument("one domain box per marginal required");
  for (int i = 0; i < cost.marginal_count(); ++i)
    if (domains[i].dim() != cost.dim(i))
      throw std::invalid_argument("domain dimension mismatch at marginal " +
                                  std::to_string(i));
}

int middle_side(const CostModel& cost) {
  int side = 0;
  for (int i = 1; i + 1 < cost.marginal_count(); ++i) side += cost.dim(i);
  return side;
}

// Offsets of each middle marginal inside the concatenated middle space.
std::vector<int> middle_offsets(const CostModel& cost) {
  std::vector<int> off;
  int acc = 0;
  for (int i = 1; i + 1 < cost.marginal_count(); ++i) {
    off.push_back(acc);
    acc += cost.dim(i);
  }
  return off;
}

// S(i,j) = -[i != j] D^2_{x_i x_j} c + D^2_{x_i x_0} c (D^2_{x_{m-1} x_0} c)^{-1}
//          D^2_{x_{m-1} x_j} c, matching the threefold-product convention of
//          the bilinear normal form.
Eigen::MatrixXd assemble_S(const CostModel& cost, const Configuration& base,
                           double det_tol) {
  const int m = cost.marginal_count();
  const Eigen::MatrixXd k = cost.second_differential(m - 1, 0, base).matrix;
  if (k.rows() != k.cols())
    throw std::runtime_error("(first,last) differential block is not square");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);
  const double det = lu.determinant();
  if (std::abs(det) <= det_tol)
    throw std::runtime_error("(first,last) differential block is singular, |det| = " +
                             std::to_string(std::abs(det)));

  const auto offsets = middle_offsets(cost);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(middle_side(cost), middle_side(cost));
  std::vector<Eigen::MatrixXd> left, right;
  for (int i = 1; i + 1 < m; ++i) {
    left.push_back(cost.second_differential(i, 0, base).matrix);
    right.push_back(lu.solve(cost.second_differential(m - 1, i, base).matrix));
  }
  for (int bi = 0; bi + 2 < m; ++bi) {
    for (int bj = 0; bj + 2 < m; ++bj) {
      Eigen::MatrixXd block = left[bi] * right[bj];
      if (bi != bj)
        block -= cost.second_differential(bi + 1, bj + 1, base).matrix;
      s.block(offsets[bi], offsets[bj], cost.dim(bi + 1), cost.dim(bj + 1)) = block;
    }
  }
  return s;
}

double max_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  return eig.eigenvalues().maxCoeff();
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "inconclusive";
  }
}

ConditionReport check_nondegenerate(const CostModel& cost,
                                    const std::vector<DomainBox>& domains, int i, int j,
                                    int samples, std::uint64_t seed,
                                    const ConditionThresholds& tol) {
  check_domains(cost, domains);
  if (i == j) throw std::invalid_argument("check_nondegenerate: i and j must differ");
  ConditionReport report;
  report.condition = "nondegeneracy";
  if (cost.dim(i) != cost.dim(j)) {
    report.samples_tested = 0;
    report.verdict = Verdict::fail;
    report.worst_value = 0.0;
    report.witness.push_back(sample_configuration(domains, derive_seed(seed, 0)));
    report.note = "marginal dimensions differ; the mixed block cannot be invertible";
    return report;
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Configuration x = sample_configuration(domains, derive_seed(seed, s));
    const Eigen::MatrixXd block = cost.second_differential(i, j, x).matrix;
    const double d = std::abs(Eigen::PartialPivLU<Eigen::MatrixXd>(block).determinant());
    if (d < worst) {
      worst = d;
      report.witness = {x};
    }
  }
  report.samples_tested = samples;
  report.worst_value = worst;
  report.verdict = (worst < tol.det_tol) ? Verdict::fail : Verdict::pass;
  report.note = kSamplingNote;
  return report;
}

ConditionReport check_twist(const CostModel& cost, const std::vector<DomainBox>& domains,
                            int i, int j, int samples, int pairs_per_sample,
                            std::uint64_t seed, const ConditionThresholds& tol) {
  check_domains(cost, domains);
  if (i == j) throw std::invalid_argument("check_twist: i and j must differ");
  ConditionReport report;
  report.condition = "twist";
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Configuration x = sample_configuration(domains, derive_seed(seed, 2 * s));
    DeterministicRng rng(derive_seed(seed, 2 * s + 1));
    for (int p = 0; p < pairs_per_sample; ++p) {
      Configuration a = x;
      Configuration b = x;
      do {
        for (int k = 0; k < domains[j].dim(); ++k) {
          a.coords[j][k] = rng.uniform(domains[j].lower[k], domains[j].upper[k]);
          b.coords[j][k] = rng.uniform(domains[j].lower[k], domains[j].upper[k]);
        }
      } while (exactly_equal(a.coords[j], b.coords[j]));
      const double gap = (cost.gradient(i, a) - cost.gradient(i, b)).norm();
      const double ratio = gap / (a.coords[j] - b.coords[j]).norm();
      if (ratio < worst) {
        worst = ratio;
        report.witness = {a, b};
      }
    }
  }
  report.samples_tested = samples;
  report.worst_value = worst;
  report.verdict = (worst < tol.twist_tol) ? Verdict::fail : Verdict::pass;
  report.note = kSamplingNote;
  return report;
}

TensorAssembly assemble_T(const CostModel& cost, const Configuration& base,
                          const std::vector<Configuration>& companions,
                          const ConditionThresholds& tol) {
  check_middle_arity(cost);
  const int m = cost.marginal_count();
  if (static_cast<int>(companions.size()) != m - 2)
    throw std::invalid_argument("assemble_T: expected " + std::to_string(m - 2) +
                                " companion configurations");
  for (int k = 0; k + 2 < m; ++k) {
    if (companions[k].marginal_count() != m)
      throw std::invalid_argument("assemble_T: companion arity mismatch");
    if (!exactly_equal(companions[k].coords[k + 1], base.coords[k + 1]))
      throw std::invalid_argument("assemble_T: companion " + std::to_string(k) +
                                  " must agree with the base in coordinate " +
                                  std::to_string(k + 1));
  }

  TensorAssembly out;
  out.base = base;
  out.companions = companions;
  out.S = assemble_S(cost, base, tol.det_tol);

  const auto offsets = middle_offsets(cost);
  out.H = Eigen::MatrixXd::Zero(out.S.rows(), out.S.cols());
  for (int k = 0; k + 2 < m; ++k) {
    const int i = k + 1;
    const Eigen::MatrixXd diff = cost.second_differential(i, i, companions[k]).matrix -
                                 cost.second_differential(i, i, base).matrix;
    out.H.block(offsets[k], offsets[k], cost.dim(i), cost.dim(i)) = diff;
  }
  out.T = out.S + out.H;
  return out;
}

namespace {

// Base in the open product, companions in the closed product with the pinned
// coordinate copied from the base.
TensorAssembly sample_assembly(const CostModel& cost, const std::vector<DomainBox>& domains,
                               std::uint64_t sample_seed, const ConditionThresholds& tol) {
  const int m = cost.marginal_count();
  Configuration base = sample_interior_configuration(domains, derive_seed(sample_seed, 0));
  std::vector<Configuration> companions;
  for (int k = 0; k + 2 < m; ++k) {
    Configuration comp = sample_configuration(domains, derive_seed(sample_seed, 1 + k));
    comp.coords[k + 1] = base.coords[k + 1];
    companions.push_back(std::move(comp));
  }
  return assemble_T(cost, base, companions, tol);
}

}  // namespace

ConditionReport scan_T_negative(const CostModel& cost,
                                const std::vector<DomainBox>& domains, int samples,
                                std::uint64_t seed, const ConditionThresholds& tol) {
  check_middle_arity(cost);
  check_domains(cost, domains);
  ConditionReport report;
  report.condition = "tensor_T";
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    TensorAssembly assembly = sample_assembly(cost, domains, derive_seed(seed, s), tol);
    const double top = max_symmetric_eigenvalue(assembly.T);
    if (top > worst) {
      worst = top;
      report.witness.clear();
      report.witness.push_back(assembly.base);
      for (auto& c : assembly.companions) report.witness.push_back(c);
    }
  }
  report.samples_tested = samples;
  report.worst_value = worst;
  report.verdict = (worst > -tol.negdef_margin) ? Verdict::fail : Verdict::pass;
  report.note = kSamplingNote;
  return report;
}

double scan_H_bound(const CostModel& cost, const std::vector<DomainBox>& domains,
                    int samples, std::uint64_t seed, const ConditionThresholds& tol) {
  check_middle_arity(cost);
  check_domains(cost, domains);
  double bound = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    TensorAssembly assembly = sample_assembly(cost, domains, derive_seed(seed, s), tol);
    bound = std::max(bound, max_symmetric_eigenvalue(assembly.H));
  }
  return bound;
}

double segment_certificate(const CostModel& cost, const Eigen::VectorXd& x1,
                           const Eigen::VectorXd& u1_grad,
                           const std::vector<Eigen::VectorXd>& start,
                           const std::vector<Eigen::VectorXd>& end,
                           const SegmentCertificateOptions& opts) {
  check_middle_arity(cost);
  const int m = cost.marginal_count();
  if (static_cast<int>(start.size()) != m - 2 || static_cast<int>(end.size()) != m - 2)
    throw std::invalid_argument("segment_certificate: need one segment per middle marginal");
  if (static_cast<int>(x1.size()) != cost.dim(0) ||
      static_cast<int>(u1_grad.size()) != cost.dim(0))
    throw std::invalid_argument("segment_certificate: x1/u1_grad dimension mismatch");
  for (int k = 0; k + 2 < m; ++k)
    if (static_cast<int>(start[k].size()) != cost.dim(k + 1) ||
        static_cast<int>(end[k].size()) != cost.dim(k + 1))
      throw std::invalid_argument("segment_certificate: segment dimension mismatch");
  if (cost.dim(0) != cost.dim(m - 1))
    throw std::invalid_argument("segment_certificate: implicit solve needs equal "
                                "first/last dimensions");
  if (opts.steps < 1) throw std::invalid_argument("segment_certificate: steps must be >= 1");

  const auto config_at = [&](double t, const Eigen::VectorXd& xm) {
    std::vector<Eigen::VectorXd> coords(static_cast<std::size_t>(m));
    coords[0] = x1;
    for (int k = 0; k + 2 < m; ++k) coords[k + 1] = (1.0 - t) * start[k] + t * end[k];
    coords[m - 1] = xm;
    return Configuration(std::move(coords));
  };

  // Newton on g(x_m) = D_{x_1} c(x_1, gamma(t), x_m) - u1_grad.
  const auto solve_xm = [&](double t, Eigen::VectorXd xm) {
    const double scale = 1.0 + u1_grad.norm();
    for (int it = 0; it < opts.newton_max_iters; ++it) {
      Configuration x = config_at(t, xm);
      const Eigen::VectorXd g = cost.gradient(0, x) - u1_grad;
      if (g.norm() <= opts.newton_tol * scale) return xm;
      const Eigen::MatrixXd jac = cost.second_differential(0, m - 1, x).matrix;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
      if (std::abs(lu.determinant()) <= opts.det_tol)
        throw std::runtime_error("segment_certificate: singular (first,last) block "
                                 "along the path");
      xm -= lu.solve(g);
    }
    throw std::runtime_error("segment_certificate: implicit solve for x_m failed");
  };

  Eigen::VectorXd xm;
  if (opts.xm_seed) {
    xm = *opts.xm_seed;
  } else if (opts.xm_domain) {
    const DomainBox& box = *opts.xm_domain;
    if (box.dim() != cost.dim(m - 1))
      throw std::invalid_argument("segment_certificate: xm_domain dimension mismatch");
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(box.dim(), 0);
    bool done = false;
    const double t0 = 0.5 / opts.steps;
    while (!done) {
      Eigen::VectorXd z(box.dim());
      for (int k = 0; k < box.dim(); ++k)
        z[k] = box.lower[k] + box.side(k) * idx[k] / (opts.grid_points - 1);
      const double r = (cost.gradient(0, config_at(t0, z)) - u1_grad).norm();
      if (r < best) {
        best = r;
        xm = z;
      }
      int k = 0;
      for (; k < box.dim(); ++k) {
        if (++idx[k] < opts.grid_points) break;
        idx[k] = 0;
      }
      done = (k == box.dim());
    }
  } else {
    throw std::invalid_argument("segment_certificate: provide xm_seed or xm_domain");
  }

  Eigen::VectorXd velocity(middle_side(cost));
  {
    const auto offsets = middle_offsets(cost);
    for (int k = 0; k + 2 < m; ++k)
      velocity.segment(offsets[k], cost.dim(k + 1)) = end[k] - start[k];
  }

  double integral = 0.0;
  for (int step = 0; step < opts.steps; ++step) {
    const double t = (step + 0.5) / opts.steps;
    xm = solve_xm(t, xm);
    const Eigen::MatrixXd s = assemble_S(cost, config_at(t, xm), opts.det_tol);
    integral += velocity.dot(s * velocity);
  }
  return integral / opts.steps;
}

}  // namespace mmot
