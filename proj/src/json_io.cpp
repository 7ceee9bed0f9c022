#include "mmot/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace mmot {

namespace {

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(j.size());
  int k = 0;
  for (const auto& x : j) v[k++] = x.get<double>();
  return v;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json j = Json::array();
  for (int k = 0; k < v.size(); ++k) j.push_back(v[k]);
  return j;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j.at(r);
    if (static_cast<int>(row.size()) != cols)
      throw std::invalid_argument("matrix JSON rows have unequal lengths");
    for (int c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

Json configuration_to_json(const Configuration& x) {
  Json j = Json::array();
  for (const auto& c : x.coords) j.push_back(vector_to_json(c));
  return j;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Json j;
  in >> j;
  return j;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

Json marginal_to_json(const DiscreteMarginal& mu) {
  Json j;
  j["dim"] = mu.dim();
  j["lower"] = vector_to_json(mu.box.lower);
  j["upper"] = vector_to_json(mu.box.upper);
  Json points = Json::array();
  for (const auto& p : mu.points) points.push_back(vector_to_json(p));
  j["points"] = std::move(points);
  j["weights"] = vector_to_json(mu.weights);
  return j;
}

DiscreteMarginal marginal_from_json(const Json& j) {
  const int dim = j.at("dim").get<int>();
  DomainBox box(vector_from_json(j.at("lower")), vector_from_json(j.at("upper")));
  if (box.dim() != dim) throw std::invalid_argument("marginal JSON: dim mismatch");
  std::vector<Eigen::VectorXd> points;
  for (const auto& p : j.at("points")) points.push_back(vector_from_json(p));
  return DiscreteMarginal(std::move(box), std::move(points),
                          vector_from_json(j.at("weights")));
}

namespace {

std::shared_ptr<const SumProfile> profile_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "neg_norm_sq")
    return std::make_shared<NegSquaredNorm>(j.value("scale", 1.0));
  throw std::invalid_argument("unknown sum profile kind: " + kind);
}

}  // namespace

std::shared_ptr<const CostModel> cost_from_json(const Json& j) {
  const std::string family = j.at("family").get<std::string>();
  const int m = j.at("m").get<int>();
  std::vector<int> dims;
  for (const auto& d : j.at("dims")) dims.push_back(d.get<int>());
  if (static_cast<int>(dims.size()) != m)
    throw std::invalid_argument("cost JSON: dims length must equal m");
  const Json params = j.value("params", Json::object());

  if (family == "concave_of_sum" || family == "concave_of_sum_perturbed") {
    for (int d : dims)
      if (d != dims[0])
        throw std::invalid_argument(family + ": all marginals must share one dimension");
    std::shared_ptr<const SumProfile> profile =
        params.contains("h") ? profile_from_json(params.at("h"))
                             : std::make_shared<NegSquaredNorm>(1.0);
    if (family == "concave_of_sum_perturbed") {
      const Json& pert = params.at("perturbation");
      const std::string kind = pert.at("kind").get<std::string>();
      if (kind != "sin_of_sum")
        throw std::invalid_argument("unknown perturbation kind: " + kind);
      profile = std::make_shared<SinePerturbedProfile>(
          profile, params.at("epsilon").get<double>(),
          vector_from_json(pert.at("frequency")), pert.value("phase", 0.0));
    }
    return std::make_shared<ConcaveOfSumCost>(m, dims[0], profile);
  }

  if (family == "bilinear") {
    std::vector<BilinearCost::Term> terms;
    for (const auto& t : params.value("blocks", Json::array()))
      terms.push_back({t.at("i").get<int>(), t.at("j").get<int>(),
                       matrix_from_json(t.at("matrix"))});
    return std::make_shared<BilinearCost>(dims, terms);
  }

  if (family == "g_plus_quadratic") {
    if (m != 3) throw std::invalid_argument("g_plus_quadratic: m must be 3");
    auto g = std::make_shared<QuadraticDifference>(matrix_from_json(params.at("q")));
    return std::make_shared<GPlusQuadraticCost>(dims[0], g);
  }

  if (family == "hedonic") {
    DomainBox z(vector_from_json(params.at("z_lower")),
                vector_from_json(params.at("z_upper")));
    std::vector<std::shared_ptr<const HedonicComponent>> components;
    for (const auto& c : params.at("components"))
      components.push_back(std::make_shared<AffineQuadraticComponent>(
          matrix_from_json(c.at("P")), vector_from_json(c.at("q")),
          matrix_from_json(c.at("B")), vector_from_json(c.at("b")),
          matrix_from_json(c.at("L")), vector_from_json(c.at("l"))));
    HedonicInnerOptions opts;
    if (params.contains("inner")) {
      const Json& inner = params.at("inner");
      opts.grid_points = inner.value("grid_points", opts.grid_points);
      opts.newton_tol = inner.value("newton_tol", opts.newton_tol);
      opts.separation_tol = inner.value("separation_tol", opts.separation_tol);
    }
    return std::make_shared<HedonicCost>(dims, std::move(z), std::move(components), opts);
  }

  throw std::invalid_argument("unknown cost family: " + family);
}

Json coupling_to_json(const Coupling& coupling) {
  Json j = Json::array();
  for (const auto& [idx, mass] : coupling.entries) {
    Json entry;
    entry["index"] = idx;
    entry["mass"] = mass;
    j.push_back(std::move(entry));
  }
  return j;
}

Coupling coupling_from_json(const Json& j, const Instance& inst) {
  Coupling coupling;
  for (const auto& entry : j) {
    std::vector<int> idx = entry.at("index").get<std::vector<int>>();
    if (static_cast<int>(idx.size()) != inst.marginal_count())
      throw std::invalid_argument("coupling JSON: index arity mismatch");
    for (int i = 0; i < inst.marginal_count(); ++i)
      if (idx[static_cast<std::size_t>(i)] < 0 ||
          idx[static_cast<std::size_t>(i)] >= inst.sizes[static_cast<std::size_t>(i)])
        throw std::invalid_argument("coupling JSON: index out of range");
    const double mass = entry.at("mass").get<double>();
    if (mass <= 0.0) throw std::invalid_argument("coupling JSON: nonpositive mass");
    coupling.entries[idx] = mass;
    coupling.objective += mass * inst.cost_at(idx);
  }
  return coupling;
}

Json potentials_to_json(const Potentials& pot) {
  Json j = Json::array();
  for (const auto& v : pot.values) j.push_back(vector_to_json(v));
  return j;
}

Potentials potentials_from_json(const Json& j) {
  Potentials pot;
  for (const auto& v : j) pot.values.push_back(vector_from_json(v));
  return pot;
}

Json condition_report_to_json(const ConditionReport& report) {
  Json j;
  j["condition"] = report.condition;
  j["verdict"] = to_string(report.verdict);
  j["samples_tested"] = report.samples_tested;
  j["worst_value"] = report.worst_value;
  Json witness = Json::array();
  for (const auto& w : report.witness) witness.push_back(configuration_to_json(w));
  j["witness"] = std::move(witness);
  j["note"] = report.note;
  return j;
}

Json slackness_report_to_json(const SlacknessReport& report) {
  return Json{{"max_gap_on_support", report.max_gap_on_support},
              {"dual_objective", report.dual_objective},
              {"primal_objective", report.primal_objective},
              {"gap", report.gap}};
}

Json graph_verdict_to_json(const GraphVerdict& verdict) {
  Json j;
  j["is_graph"] = verdict.is_graph;
  j["max_fanout"] = verdict.max_fanout;
  j["off_graph_mass"] = verdict.off_graph_mass;
  j["maps"] = verdict.maps;
  j["approximate_source"] = verdict.approximate_source;
  j["weight_driven_fanout_atoms"] = verdict.weight_driven_fanout_atoms;
  j["unexplained_fanout_atoms"] = verdict.unexplained_fanout_atoms;
  return j;
}

Json pushforward_report_to_json(const PushforwardReport& report) {
  return Json{{"max_discrepancy", report.max_discrepancy},
              {"per_marginal", report.per_marginal}};
}

Json uniqueness_verdict_to_json(const UniquenessVerdict& verdict) {
  return Json{{"trials", verdict.trials},
              {"accepted", verdict.accepted},
              {"support_stable", verdict.support_stable},
              {"max_support_symmetric_difference_mass",
               verdict.max_support_symmetric_difference_mass}};
}

Json dual_uniqueness_report_to_json(const DualUniquenessReport& report) {
  return Json{{"trials", report.trials},
              {"accepted", report.accepted},
              {"max_offset_spread", report.max_offset_spread},
              {"max_offset_sum", report.max_offset_sum},
              {"constants_up_to_tolerance", report.constants_up_to_tolerance},
              {"note", report.note}};
}

Instance load_instance(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  const auto base = path.has_parent_path() ? path.parent_path()
                                           : std::filesystem::path(".");
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path candidate(p);
    return candidate.is_absolute() ? candidate : base / candidate;
  };
  std::vector<DiscreteMarginal> marginals;
  for (const auto& p : j.at("marginals"))
    marginals.push_back(marginal_from_json(read_json_file(resolve(p.get<std::string>()))));
  auto cost = cost_from_json(read_json_file(resolve(j.at("cost").get<std::string>())));
  const std::size_t cap = j.value("cap", static_cast<std::size_t>(1'000'000));
  return make_instance(std::move(marginals), std::move(cost), cap);
}

void write_maps_csv(const std::filesystem::path& path, const GraphVerdict& verdict) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::size_t m = verdict.maps.size() + 1;
  for (std::size_t i = 0; i < m; ++i) out << (i ? "," : "") << "x" << i + 1;
  out << "\n";
  if (!verdict.is_graph) return;
  const std::size_t n0 = verdict.maps.empty() ? 0 : verdict.maps[0].size();
  for (std::size_t a0 = 0; a0 < n0; ++a0) {
    out << a0;
    for (const auto& map : verdict.maps) out << "," << map[a0];
    out << "\n";
  }
}

}  // namespace mmot
