#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "mmot/diagnostics.hpp"
#include "mmot/rng.hpp"

using namespace mmot;

namespace {

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

Instance gs_instance(int m, int n, int dim, std::uint64_t seed, bool weighted = false) {
  std::vector<DiscreteMarginal> marginals;
  for (int i = 0; i < m; ++i) {
    const auto s = derive_seed(seed, static_cast<std::uint64_t>(i));
    marginals.push_back(weighted ? weighted_marginal(DomainBox::unit(dim), n, s)
                                 : uniform_marginal(DomainBox::unit(dim), n, s));
  }
  auto cost = std::make_shared<ConcaveOfSumCost>(m, dim, std::make_shared<NegSquaredNorm>());
  return make_instance(std::move(marginals), cost);
}

Instance zero_cost_two_by_two() {
  const DomainBox box = DomainBox::unit(1);
  std::vector<Eigen::VectorXd> pts{vec1(0.25), vec1(0.75)};
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  DiscreteMarginal mu(box, pts, w);
  auto cost = std::make_shared<BilinearCost>(std::vector<int>{1, 1},
                                             std::vector<BilinearCost::Term>{});
  return make_instance({mu, mu}, cost);
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("graph extraction recovers pushforward couplings") {
  Instance inst = gs_instance(3, 4, 1, 2);
  const std::vector<std::vector<int>> maps{{2, 3, 0, 1}, {0, 1, 2, 3}};
  const Coupling coupling = coupling_from_maps(inst, maps);
  const GraphVerdict verdict = graph_extract(coupling, inst);
  CHECK(verdict.is_graph);
  CHECK(verdict.max_fanout == 1);
  CHECK(verdict.off_graph_mass == doctest::Approx(0.0));
  CHECK(verdict.maps == maps);
}

TEST_CASE("product coupling fanout and off-graph mass") {
  Instance inst = gs_instance(3, 2, 1, 3);
  Coupling product;
  for (std::size_t flat = 0; flat < inst.tensor_size(); ++flat)
    product.entries[inst.unflatten(flat)] = 0.125;
  const GraphVerdict verdict = graph_extract(product, inst);
  CHECK_FALSE(verdict.is_graph);
  CHECK(verdict.max_fanout == 4);
  CHECK(verdict.off_graph_mass == doctest::Approx(0.75));
  CHECK(verdict.maps.empty());
}

TEST_CASE("rebuilding from extracted maps reproduces the coupling") {
  Instance inst = gs_instance(3, 5, 2, 4);
  const Coupling original = solve_lp(inst).coupling;
  const GraphVerdict verdict = graph_extract(original, inst);
  REQUIRE(verdict.is_graph);
  REQUIRE(verdict.off_graph_mass <= 1e-12);
  const Coupling rebuilt = coupling_from_maps(inst, verdict.maps);
  REQUIRE(rebuilt.entries.size() == original.entries.size());
  for (const auto& [idx, mass] : original.entries) {
    REQUIRE(rebuilt.entries.count(idx) == 1);
    CHECK(rebuilt.entries.at(idx) == doctest::Approx(mass).epsilon(1e-9));
  }
}

TEST_CASE("pushforward check") {
  SUBCASE("permutation maps transport exactly") {
    Instance inst = gs_instance(3, 4, 1, 5);
    const std::vector<std::vector<int>> maps{{1, 0, 3, 2}, {3, 2, 1, 0}};
    const Coupling coupling = coupling_from_maps(inst, maps);
    GraphVerdict verdict = graph_extract(coupling, inst);
    REQUIRE(verdict.is_graph);
    const PushforwardReport report = pushforward_check(coupling, verdict, inst);
    CHECK(report.max_discrepancy == doctest::Approx(0.0));
  }
  SUBCASE("two atoms collapsing onto one target") {
    const DomainBox box = DomainBox::unit(1);
    Eigen::VectorXd w0(2);
    w0 << 0.5, 0.5;
    DiscreteMarginal mu0(box, {vec1(0.2), vec1(0.8)}, w0);
    DiscreteMarginal mu1(box, {vec1(0.5)}, Eigen::VectorXd::Ones(1));
    auto cost = std::make_shared<CallbackCost>(
        std::vector<int>{1, 1},
        [](const Configuration& x) { return x.coords[0][0] * x.coords[1][0]; });
    Instance inst = make_instance({mu0, mu1}, cost);
    const Coupling coupling = solve_lp(inst).coupling;
    const GraphVerdict verdict = graph_extract(coupling, inst);
    REQUIRE(verdict.is_graph);
    const PushforwardReport report = pushforward_check(coupling, verdict, inst);
    CHECK(report.max_discrepancy == doctest::Approx(0.0));
  }
  SUBCASE("weighted marginals inherit the LP feasibility error") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      Instance inst = gs_instance(3, 4, 2, seed, /*weighted=*/true);
      const Coupling coupling = solve_lp(inst).coupling;
      const GraphVerdict verdict = graph_extract(coupling, inst);
      if (!verdict.is_graph) continue;  // weight splits are legitimate here
      const PushforwardReport report = pushforward_check(coupling, verdict, inst);
      CHECK(report.max_discrepancy <= 1e-9);
    }
  }
  SUBCASE("requires a graph verdict") {
    Instance inst = gs_instance(3, 2, 1, 3);
    Coupling product;
    for (std::size_t flat = 0; flat < inst.tensor_size(); ++flat)
      product.entries[inst.unflatten(flat)] = 0.125;
    const GraphVerdict verdict = graph_extract(product, inst);
    CHECK_THROWS_AS(pushforward_check(product, verdict, inst), std::invalid_argument);
  }
}

TEST_CASE("uniqueness probe") {
  SUBCASE("a unique optimum is support stable") {
    Instance inst = gs_instance(3, 4, 2, 14);
    const UniquenessVerdict verdict = uniqueness_probe(inst, 6, 9);
    CHECK(verdict.accepted >= 2);
    CHECK(verdict.support_stable);
    CHECK(verdict.max_support_symmetric_difference_mass <= 1e-9);
  }
  SUBCASE("total degeneracy is unstable") {
    Instance inst = zero_cost_two_by_two();
    const UniquenessVerdict verdict = uniqueness_probe(inst, 8, 5);
    CHECK(verdict.accepted >= 2);
    CHECK_FALSE(verdict.support_stable);
    CHECK(verdict.max_support_symmetric_difference_mass > 0.1);
  }
  SUBCASE("trials precondition") {
    Instance inst = zero_cost_two_by_two();
    CHECK_THROWS_AS(uniqueness_probe(inst, 1, 5), std::invalid_argument);
  }
}

TEST_CASE("stable graph couplings induce identical maps") {
  Instance inst = gs_instance(3, 5, 2, 4);
  const UniquenessVerdict uq = uniqueness_probe(inst, 6, 31);
  REQUIRE(uq.support_stable);
  // Two solves through different pivot orders: stable support forces the
  // same graph, hence the same maps on every first-marginal atom.
  const Coupling a = solve_lp(inst).coupling;
  std::vector<std::size_t> reversed(inst.tensor_size());
  for (std::size_t v = 0; v < inst.tensor_size(); ++v)
    reversed[v] = inst.tensor_size() - 1 - v;
  const Coupling b = solve_lp_with_objective(inst, inst.cost_tensor, reversed).coupling;
  const GraphVerdict va = graph_extract(a, inst);
  const GraphVerdict vb = graph_extract(b, inst);
  REQUIRE(va.is_graph);
  REQUIRE(vb.is_graph);
  CHECK(va.maps == vb.maps);
}

TEST_CASE("fanout splits are classified against the weight vectors") {
  SUBCASE("a heavy atom forced across two light targets is weight-driven") {
    const DomainBox box = DomainBox::unit(1);
    Eigen::VectorXd w0(2), w1(2);
    w0 << 0.6, 0.4;
    w1 << 0.5, 0.5;
    DiscreteMarginal mu0(box, {vec1(0.1), vec1(0.9)}, w0);
    DiscreteMarginal mu1(box, {vec1(0.2), vec1(0.8)}, w1);
    auto cost = std::make_shared<CallbackCost>(
        std::vector<int>{1, 1}, [](const Configuration& x) {
          const double d = x.coords[0][0] - x.coords[1][0];
          return d * d;
        });
    Instance inst = make_instance({mu0, mu1}, cost);
    const GraphVerdict verdict = graph_extract(solve_lp(inst).coupling, inst);
    CHECK_FALSE(verdict.is_graph);
    CHECK(verdict.weight_driven_fanout_atoms >= 1);
    CHECK(verdict.unexplained_fanout_atoms == 0);
  }
  SUBCASE("uniform product splits are unexplained") {
    Instance inst = gs_instance(3, 2, 1, 3);
    Coupling product;
    for (std::size_t flat = 0; flat < inst.tensor_size(); ++flat)
      product.entries[inst.unflatten(flat)] = 0.125;
    const GraphVerdict verdict = graph_extract(product, inst);
    CHECK_FALSE(verdict.is_graph);
    CHECK(verdict.weight_driven_fanout_atoms == 0);
    CHECK(verdict.unexplained_fanout_atoms == 2);
  }
}

TEST_CASE("entropic couplings are rounded before extraction") {
  Instance inst = gs_instance(3, 4, 1, 20);
  const EntropicSolution entropic = solve_entropic(inst, 0.05, 20000, 1e-9);
  REQUIRE(entropic.converged);
  // The Gibbs plan itself is dense.
  CHECK(entropic.coupling.entries.size() > 16);
  const Coupling rounded = round_to_graph(entropic.coupling, inst);
  GraphVerdict verdict = graph_extract(rounded, inst);
  verdict.approximate_source = true;
  CHECK(verdict.is_graph);
  CHECK(rounded.entries.size() == 4);
  const Eigen::VectorXd first = coupling_marginal(rounded, 0, inst.sizes);
  CHECK((first - inst.marginals[0].weights).cwiseAbs().maxCoeff() < 1e-12);
}

}  // TEST_SUITE
