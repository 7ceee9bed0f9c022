#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mmot/geometry.hpp"
#include "mmot/rng.hpp"

using namespace mmot;

TEST_SUITE("geometry") {

TEST_CASE("box validation") {
  CHECK_NOTHROW(DomainBox::unit(2));
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.0, 1.0;
  hi << 1.0, 1.0;
  CHECK_THROWS_AS(DomainBox(lo, hi), std::invalid_argument);
  CHECK_THROWS_AS(DomainBox(Eigen::VectorXd(), Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("sampling is deterministic") {
  const std::vector<DomainBox> domains{DomainBox::unit(2)};
  const Configuration a = sample_configuration(domains, 0);
  const Configuration b = sample_configuration(domains, 0);
  REQUIRE(a.marginal_count() == 1);
  CHECK(exactly_equal(a.coords[0], b.coords[0]));
  const Configuration c = sample_configuration(domains, 1);
  CHECK_FALSE(exactly_equal(a.coords[0], c.coords[0]));
}

TEST_CASE("samples stay inside their boxes") {
  const std::vector<DomainBox> domains{DomainBox::cube(1, 0.0, 1.0),
                                       DomainBox::cube(1, 2.0, 3.0)};
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    const Configuration x = sample_configuration(domains, seed);
    CHECK(domains[0].contains(x.coords[0]));
    CHECK(domains[1].contains(x.coords[1]));
  }
}

TEST_CASE("empty domain list is rejected") {
  CHECK_THROWS_AS(sample_configuration({}, 0), std::invalid_argument);
}

TEST_CASE("law of large numbers sanity") {
  const std::vector<DomainBox> domains{DomainBox::unit(1)};
  double mean = 0.0;
  const int samples = 10000;
  for (int k = 0; k < samples; ++k)
    mean += sample_configuration(domains, derive_seed(7, k)).coords[0][0];
  mean /= samples;
  CHECK(std::abs(mean - 0.5) < 0.02);
}

TEST_CASE("interior sampler avoids the boundary") {
  const std::vector<DomainBox> domains{DomainBox::unit(3)};
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    const Configuration x = sample_interior_configuration(domains, seed);
    for (int k = 0; k < 3; ++k) {
      CHECK(x.coords[0][k] > 0.0);
      CHECK(x.coords[0][k] < 1.0);
    }
  }
}

TEST_CASE("uniform marginal basics") {
  const DomainBox box = DomainBox::unit(2);
  SUBCASE("single point") {
    const DiscreteMarginal mu = uniform_marginal(box, 1, 3);
    CHECK(mu.size() == 1);
    CHECK(mu.weights[0] == doctest::Approx(1.0));
  }
  SUBCASE("equal weights") {
    const DiscreteMarginal mu = uniform_marginal(box, 4, 3);
    for (int k = 0; k < 4; ++k) CHECK(mu.weights[k] == doctest::Approx(0.25));
    CHECK(mu.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("reproducible point set") {
    const DiscreteMarginal a = uniform_marginal(box, 50, 11);
    const DiscreteMarginal b = uniform_marginal(box, 50, 11);
    for (int k = 0; k < 50; ++k) CHECK(exactly_equal(a.points[k], b.points[k]));
  }
  CHECK_THROWS_AS(uniform_marginal(box, 0, 1), std::invalid_argument);
}

TEST_CASE("weighted marginal is a probability vector") {
  const DiscreteMarginal mu = weighted_marginal(DomainBox::unit(1), 6, 5);
  CHECK(mu.weights.minCoeff() > 0.0);
  CHECK(mu.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("marginal invariants are enforced") {
  const DomainBox box = DomainBox::unit(1);
  std::vector<Eigen::VectorXd> pts{Eigen::VectorXd::Constant(1, 0.2),
                                   Eigen::VectorXd::Constant(1, 0.2)};
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  CHECK_THROWS_AS(DiscreteMarginal(box, pts, w), std::invalid_argument);

  pts[1] = Eigen::VectorXd::Constant(1, 2.0);  // outside
  CHECK_THROWS_AS(DiscreteMarginal(box, pts, w), std::invalid_argument);

  pts[1] = Eigen::VectorXd::Constant(1, 0.8);
  Eigen::VectorXd bad(2);
  bad << 0.5, 0.6;
  CHECK_THROWS_AS(DiscreteMarginal(box, pts, bad), std::invalid_argument);
  bad << -0.5, 1.5;
  CHECK_THROWS_AS(DiscreteMarginal(box, pts, bad), std::invalid_argument);
  CHECK_NOTHROW(DiscreteMarginal(box, pts, w));
}

}  // TEST_SUITE
