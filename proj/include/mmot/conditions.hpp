#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmot/costs.hpp"

namespace mmot {

struct ConditionThresholds {
  double det_tol = 1e-10;
  double twist_tol = 1e-8;
  double negdef_margin = 0.0;
};

enum class Verdict { pass, fail, inconclusive };

const char* to_string(Verdict v);

// Evidence container for a sampled structural check. A pass is sampling
// evidence, never a proof; `note` states as much.
struct ConditionReport {
  std::string condition;
  int samples_tested = 0;
  Verdict verdict = Verdict::inconclusive;
  double worst_value = 0.0;
  std::vector<Configuration> witness;
  std::string note;
};

// The second-order structural object on the middle marginals 1..m-2
// (0-based): S from mixed differentials at `base`, H from Hessian
// differences against the companions, T = S + H.
struct TensorAssembly {
  Configuration base;
  std::vector<Configuration> companions;  // companions[k] pins coordinate k+1
  Eigen::MatrixXd S;
  Eigen::MatrixXd H;
  Eigen::MatrixXd T;
};

// Minimum over samples of |det D^2_{x_i x_j} c|; fails below det_tol.
// Marginals of unequal dimension fail immediately.
ConditionReport check_nondegenerate(const CostModel& cost,
                                    const std::vector<DomainBox>& domains, int i, int j,
                                    int samples, std::uint64_t seed,
                                    const ConditionThresholds& tol = {});

// Gradient-collision scan for injectivity of x_j -> D_{x_i} c: minimum over
// sampled pairs of |grad difference| / |x_j difference|.
ConditionReport check_twist(const CostModel& cost, const std::vector<DomainBox>& domains,
                            int i, int j, int samples, int pairs_per_sample,
                            std::uint64_t seed, const ConditionThresholds& tol = {});

TensorAssembly assemble_T(const CostModel& cost, const Configuration& base,
                          const std::vector<Configuration>& companions,
                          const ConditionThresholds& tol = {});

// Largest eigenvalue of the symmetrized T over sampled (base, companions);
// fails when it exceeds -negdef_margin.
ConditionReport scan_T_negative(const CostModel& cost,
                                const std::vector<DomainBox>& domains, int samples,
                                std::uint64_t seed, const ConditionThresholds& tol = {});

// Worst-case H contribution: max over samples of the largest eigenvalue of
// the symmetrized H. Reported alongside segment certificates, whose
// integral covers the S part only.
double scan_H_bound(const CostModel& cost, const std::vector<DomainBox>& domains,
                    int samples, std::uint64_t seed, const ConditionThresholds& tol = {});

struct SegmentCertificateOptions {
  int steps = 64;                          // composite midpoint nodes
  std::optional<Eigen::VectorXd> xm_seed;  // start for the implicit x_m solve
  std::optional<DomainBox> xm_domain;      // grid-searched when no seed given
  int grid_points = 17;
  double newton_tol = 1e-11;
  int newton_max_iters = 60;
  double det_tol = 1e-10;
};

// Quadrature of the S form along the straight segments between `start` and
// `end` (one segment per middle marginal), tracking x_m through the implicit
// first-order condition Du_1 = D_{x_1} c. Negative values certify that two
// candidate couplings cannot coexist.
double segment_certificate(const CostModel& cost, const Eigen::VectorXd& x1,
                           const Eigen::VectorXd& u1_grad,
                           const std::vector<Eigen::VectorXd>& start,
                           const std::vector<Eigen::VectorXd>& end,
                           const SegmentCertificateOptions& opts = {});

}  // namespace mmot
