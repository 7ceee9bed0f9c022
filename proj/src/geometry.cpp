#include "mmot/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mmot/rng.hpp"

namespace mmot {

DomainBox::DomainBox(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw std::invalid_argument("DomainBox: lower/upper must be nonempty and of equal length");
  for (int k = 0; k < dim(); ++k)
    if (!(lower[k] < upper[k]))
      throw std::invalid_argument("DomainBox: lower[" + std::to_string(k) +
                                  "] must be strictly below upper");
}

DomainBox DomainBox::unit(int dim) { return cube(dim, 0.0, 1.0); }

DomainBox DomainBox::cube(int dim, double lo, double hi) {
  return DomainBox(Eigen::VectorXd::Constant(dim, lo),
                   Eigen::VectorXd::Constant(dim, hi));
}

bool exactly_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  for (int k = 0; k < a.size(); ++k)
    if (a[k] != b[k]) return false;
  return true;
}

bool DomainBox::contains(const Eigen::VectorXd& p) const {
  if (p.size() != lower.size()) return false;
  for (int k = 0; k < dim(); ++k)
    if (p[k] < lower[k] || p[k] > upper[k]) return false;
  return true;
}

DiscreteMarginal::DiscreteMarginal(DomainBox b, std::vector<Eigen::VectorXd> pts,
                                   Eigen::VectorXd w)
    : box(std::move(b)), points(std::move(pts)), weights(std::move(w)) {
  const int n = static_cast<int>(points.size());
  if (n == 0) throw std::invalid_argument("DiscreteMarginal: empty support");
  if (weights.size() != n)
    throw std::invalid_argument("DiscreteMarginal: points/weights length mismatch");
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (weights[k] < 0.0)
      throw std::invalid_argument("DiscreteMarginal: negative weight");
    sum += weights[k];
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("DiscreteMarginal: weights must sum to 1 within 1e-12");
  for (int k = 0; k < n; ++k) {
    if (!box.contains(points[k]))
      throw std::invalid_argument("DiscreteMarginal: point " + std::to_string(k) +
                                  " outside the box");
    for (int l = 0; l < k; ++l)
      if (exactly_equal(points[k], points[l]))
        throw std::invalid_argument("DiscreteMarginal: duplicate support atoms " +
                                    std::to_string(l) + ", " + std::to_string(k));
  }
}

Configuration sample_configuration(const std::vector<DomainBox>& domains,
                                   std::uint64_t seed) {
  if (domains.empty())
    throw std::invalid_argument("sample_configuration: empty domain list");
  DeterministicRng rng(seed);
  std::vector<Eigen::VectorXd> coords;
  coords.reserve(domains.size());
  for (const DomainBox& box : domains) {
    Eigen::VectorXd p(box.dim());
    for (int k = 0; k < box.dim(); ++k)
      p[k] = rng.uniform(box.lower[k], box.upper[k]);
    coords.push_back(std::move(p));
  }
  return Configuration(std::move(coords));
}

Configuration sample_interior_configuration(const std::vector<DomainBox>& domains,
                                            std::uint64_t seed) {
  if (domains.empty())
    throw std::invalid_argument("sample_interior_configuration: empty domain list");
  DeterministicRng rng(seed);
  std::vector<Eigen::VectorXd> coords;
  coords.reserve(domains.size());
  for (const DomainBox& box : domains) {
    Eigen::VectorXd p(box.dim());
    for (int k = 0; k < box.dim(); ++k)
      p[k] = box.lower[k] + rng.uniform_open01() * box.side(k);
    coords.push_back(std::move(p));
  }
  return Configuration(std::move(coords));
}

namespace {

std::vector<Eigen::VectorXd> distinct_uniform_points(const DomainBox& box, int n,
                                                     DeterministicRng& rng) {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(pts.size()) < n) {
    Eigen::VectorXd p(box.dim());
    for (int k = 0; k < box.dim(); ++k)
      p[k] = rng.uniform(box.lower[k], box.upper[k]);
    bool fresh = true;
    for (const auto& q : pts)
      if (exactly_equal(p, q)) { fresh = false; break; }
    if (fresh) pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace

DiscreteMarginal uniform_marginal(const DomainBox& box, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("uniform_marginal: n must be >= 1");
  DeterministicRng rng(seed);
  auto pts = distinct_uniform_points(box, n, rng);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
  // Renormalize exactly so the probability invariant holds bit-tight.
  w /= w.sum();
  return DiscreteMarginal(box, std::move(pts), std::move(w));
}

DiscreteMarginal weighted_marginal(const DomainBox& box, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("weighted_marginal: n must be >= 1");
  DeterministicRng rng(seed);
  auto pts = distinct_uniform_points(box, n, rng);
  Eigen::VectorXd w(n);
  for (int k = 0; k < n; ++k) w[k] = -std::log(rng.uniform_open01());
  w /= w.sum();
  return DiscreteMarginal(box, std::move(pts), std::move(w));
}

}  // namespace mmot
