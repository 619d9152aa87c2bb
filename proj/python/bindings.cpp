#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lagaboost/boosting.hpp"
#include "lagaboost/laplace.hpp"
#include "lagaboost/model_io.hpp"
#include "lagaboost/prediction.hpp"
#include "lagaboost/simulation.hpp"

namespace py = pybind11;
using namespace lagaboost;

namespace {

using OptLabels = std::optional<std::vector<std::int64_t>>;
using OptLocs = std::optional<Eigen::MatrixXd>;

LatentStructure make_structure(const OptLabels& groups, const OptLocs& locations) {
  if (groups.has_value() == locations.has_value()) {
    throw std::invalid_argument("pass exactly one of groups= or locations=");
  }
  if (groups) return GroupedStructure::from_labels(*groups);
  return GpStructure(*locations);
}

StructureQuery make_query(const OptLabels& groups, const OptLocs& locations) {
  if (groups) return *groups;
  if (locations) return *locations;
  return std::monostate{};
}

ModelFile fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::string& likelihood,
              const OptLabels& groups, const OptLocs& locations, int iterations, double learning_rate, int max_depth,
              int min_leaf, const std::string& algorithm, int folds, std::uint64_t seed) {
  const LikelihoodSpec lik{parse_likelihood(likelihood), {}};
  BoostConfig bc;
  bc.iterations = iterations;
  bc.learning_rate = learning_rate;
  bc.tree = {max_depth, min_leaf};
  bc.seed = seed;
  ModelFile file;
  file.schema.algorithm = algorithm;
  py::gil_scoped_release release;
  if (algorithm == "independent") {
    file.model = fit_independent_boosting(X, y, lik, bc);
  } else if (algorithm == "linear") {
    file.model = fit_linear_baseline(X, y, lik, make_structure(groups, locations));
  } else if (algorithm == "lagaboost-oos") {
    OosOptions opts;
    opts.folds = folds;
    file.model = fit_lagaboost_oos(X, y, lik, make_structure(groups, locations), bc, opts);
  } else if (algorithm == "lagaboost") {
    file.model = fit_lagaboost(X, y, lik, make_structure(groups, locations), bc);
  } else {
    throw std::invalid_argument("unknown algorithm '" + algorithm + "'");
  }
  return file;
}

py::dict predict(const ModelFile& file, const Eigen::MatrixXd& X, const OptLabels& groups, const OptLocs& locations) {
  const PredictiveMoments mom =
      std::visit([&](const auto& m) { return predict_latent(m, X, make_query(groups, locations)); }, file.model);
  const LikelihoodKind kind = std::visit([](const auto& m) { return m.likelihood; }, file.model);
  py::dict out;
  out["latent_mean"] = mom.mean;
  out["latent_var"] = mom.var;
  out["response"] = predict_response(kind, mom);
  out["unseen_groups"] = mom.unseen_groups;
  return out;
}

py::dict set_dict(const SimSet& s) {
  py::dict d;
  d["X"] = s.X;
  d["y"] = s.y;
  d["F"] = s.F;
  d["effect"] = s.effect;
  if (!s.groups.empty()) d["groups"] = s.groups;
  if (s.locations.size() > 0) d["locations"] = s.locations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lagaboost, m) {
  m.doc() = "Boosting with latent Gaussian models (C++ core)";

  py::register_exception<ModelFormatError>(m, "ModelFormatError", PyExc_ValueError);

  py::class_<ModelFile>(m, "Model")
      .def_property_readonly("algorithm", [](const ModelFile& f) { return f.schema.algorithm; })
      .def_property_readonly("likelihood",
                             [](const ModelFile& f) {
                               return to_string(std::visit([](const auto& x) { return x.likelihood; }, f.model));
                             })
      .def_property_readonly("theta",
                             [](const ModelFile& f) -> std::optional<Eigen::VectorXd> {
                               const auto* latent = std::visit(
                                   [](const auto& x) { return x.latent ? &*x.latent : nullptr; }, f.model);
                               if (!latent) return std::nullopt;
                               return latent->theta.natural();
                             })
      .def_property_readonly("num_trees",
                             [](const ModelFile& f) {
                               const auto* b = std::get_if<BoostedModel>(&f.model);
                               return b ? b->trees.size() : std::size_t{0};
                             })
      .def("predict_F",
           [](const ModelFile& f, const Eigen::MatrixXd& X) {
             return std::visit([&](const auto& x) -> Eigen::VectorXd { return x.predict_F(X); }, f.model);
           })
      .def("predict", &predict, py::arg("X"), py::kw_only(), py::arg("groups") = py::none(),
           py::arg("locations") = py::none())
      .def("to_json", &dump_model)
      .def_static("from_json", &parse_model);

  m.def("fit", &fit, py::arg("X"), py::arg("y"), py::kw_only(), py::arg("likelihood") = "bernoulli-probit",
        py::arg("groups") = py::none(), py::arg("locations") = py::none(), py::arg("iterations") = 100,
        py::arg("learning_rate") = 0.1, py::arg("max_depth") = 5, py::arg("min_leaf") = 10,
        py::arg("algorithm") = "lagaboost", py::arg("folds") = 4, py::arg("seed") = 0,
        "Fit a model; pass groups= (integer labels) or locations= (n x 2) for latent effects.");

  m.def(
      "laplace_nll",
      [](const Eigen::VectorXd& y, const Eigen::VectorXd& F, const std::string& likelihood, const OptLabels& groups,
         const OptLocs& locations, const Eigen::VectorXd& theta) {
        const LatentModel model({parse_likelihood(likelihood), {}}, y, make_structure(groups, locations));
        const LaplaceState st = find_mode(model, ThetaVector::from_natural(theta), F);
        py::dict out;
        out["nll"] = st.nll;
        out["mode"] = st.mode;
        out["grad_F"] = grad_F(model, st);
        out["grad_theta"] = grad_theta(model, st);
        return out;
      },
      py::arg("y"), py::arg("F"), py::kw_only(), py::arg("likelihood") = "bernoulli-probit",
      py::arg("groups") = py::none(), py::arg("locations") = py::none(), py::arg("theta"),
      "Laplace-approximated negative log marginal likelihood and its gradients. theta is on the natural "
      "scale; grad_theta is with respect to log theta.");

  m.def(
      "simulate",
      [](const std::string& scenario, std::uint64_t replicate, std::uint64_t seed, std::optional<int> n) {
        SimConfig cfg = default_sim_config(parse_scenario(scenario));
        cfg.seed = seed;
        if (n) cfg.n = *n;
        const SimData d = gen_dataset(cfg, replicate);
        py::dict out;
        out["train"] = set_dict(d.train);
        out["interp"] = set_dict(d.interp);
        out["extrap"] = set_dict(d.extrap);
        return out;
      },
      py::arg("scenario"), py::arg("replicate") = 0, py::arg("seed") = 1, py::arg("n") = py::none());
}
