#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace mmot {

// Closed axis-aligned box; every domain in the toolkit is one of these.
struct DomainBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  DomainBox() = default;
  DomainBox(Eigen::VectorXd lo, Eigen::VectorXd hi);

  static DomainBox unit(int dim);
  static DomainBox cube(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lower.size()); }
  double side(int k) const { return upper[k] - lower[k]; }
  bool contains(const Eigen::VectorXd& p) const;  // inclusive
};

// Weighted point cloud on a box. Weights form a probability vector and
// support atoms are pairwise distinct.
struct DiscreteMarginal {
  DomainBox box;
  std::vector<Eigen::VectorXd> points;
  Eigen::VectorXd weights;

  DiscreteMarginal() = default;
  DiscreteMarginal(DomainBox box, std::vector<Eigen::VectorXd> points,
                   Eigen::VectorXd weights);

  int size() const { return static_cast<int>(points.size()); }
  int dim() const { return box.dim(); }
};

// One point per marginal: the joint coordinate (x_0, ..., x_{m-1}).
// Marginal indices are 0-based throughout the toolkit.
struct Configuration {
  std::vector<Eigen::VectorXd> coords;

  Configuration() = default;
  explicit Configuration(std::vector<Eigen::VectorXd> c) : coords(std::move(c)) {}

  int marginal_count() const { return static_cast<int>(coords.size()); }
};

// Exact coefficient-wise equality.
bool exactly_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// One uniform draw per domain; deterministic in the seed.
Configuration sample_configuration(const std::vector<DomainBox>& domains,
                                   std::uint64_t seed);

// Same, but every coordinate strictly inside its box.
Configuration sample_interior_configuration(const std::vector<DomainBox>& domains,
                                            std::uint64_t seed);

// n distinct uniform points, weights all 1/n.
DiscreteMarginal uniform_marginal(const DomainBox& box, int n, std::uint64_t seed);

// n distinct uniform points with Dirichlet(1,...,1) weights.
DiscreteMarginal weighted_marginal(const DomainBox& box, int n, std::uint64_t seed);

}  // namespace mmot
