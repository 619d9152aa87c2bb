#include <doctest.h>

#include <filesystem>

#include "lagaboost/boosting.hpp"
#include "lagaboost/model_io.hpp"
#include "lagaboost/prediction.hpp"
#include "lagaboost/simulation.hpp"

using namespace lagaboost;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::ordered_json;

namespace {

ModelFile grouped_file() {
  SimConfig cfg = default_sim_config(Scenario::GroupedBinary);
  cfg.n = 200;
  const auto d = gen_dataset(cfg, 0);
  BoostConfig c;
  c.iterations = 5;
  c.tree = {3, 5};
  ModelFile f;
  f.schema = {"lagaboost", "y", "group", {}, {"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9"}};
  f.model = fit_lagaboost(d.train.X, d.train.y, {LikelihoodKind::BernoulliProbit, {}},
                          GroupedStructure::from_labels(d.train.groups), c);
  return f;
}

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("boosted grouped model round-trips exactly") {
    const ModelFile f = grouped_file();
    const ModelFile g = parse_model(dump_model(f));
    const auto& a = std::get<BoostedModel>(f.model);
    const auto& b = std::get<BoostedModel>(g.model);
    CHECK(a.f0 == b.f0);
    CHECK(a.trees == b.trees);
    CHECK(a.latent->mode == b.latent->mode);
    CHECK(a.latent->w_tilde == b.latent->w_tilde);
    CHECK(a.latent->theta == b.latent->theta);
    CHECK(g.schema.feature_cols == f.schema.feature_cols);
    CHECK(dump_model(g) == dump_model(f));

    SimConfig cfg = default_sim_config(Scenario::GroupedBinary);
    cfg.n = 200;
    const auto d = gen_dataset(cfg, 0);
    const auto pa = predict_latent(a, d.interp.X, d.interp.groups);
    const auto pb = predict_latent(b, d.interp.X, d.interp.groups);
    CHECK(pa.mean == pb.mean);
    CHECK(pa.var == pb.var);
  }

  TEST_CASE("GP linear and independent models round-trip") {
    SimConfig cfg = default_sim_config(Scenario::SpatialPoisson);
    cfg.n = 50;
    const auto d = gen_dataset(cfg, 0);
    ModelFile lin;
    lin.schema.loc_cols = {"loc1", "loc2"};
    lin.model = fit_linear_baseline(d.train.X, d.train.y, {LikelihoodKind::PoissonLog, {}},
                                    GpStructure(d.train.locations));
    const auto back = parse_model(dump_model(lin));
    const auto& l0 = std::get<LinearModel>(lin.model);
    const auto& l1 = std::get<LinearModel>(back.model);
    CHECK(l0.beta == l1.beta);
    CHECK(std::get<GpStructure>(l0.latent->structure).locations() ==
          std::get<GpStructure>(l1.latent->structure).locations());
    CHECK(predict_latent(l0, d.interp.X, d.interp.locations).var ==
          predict_latent(l1, d.interp.X, d.interp.locations).var);

    BoostConfig c;
    c.iterations = 3;
    ModelFile ind;
    ind.model = fit_independent_boosting(d.train.X, d.train.y, {LikelihoodKind::PoissonLog, {}}, c);
    const ModelFile ind_back = parse_model(dump_model(ind));
    const auto& i1 = std::get<BoostedModel>(ind_back.model);
    CHECK_FALSE(i1.latent.has_value());
    CHECK(i1.predict_F(d.interp.X) == std::get<BoostedModel>(ind.model).predict_F(d.interp.X));
  }

  TEST_CASE("files on disk") {
    const auto path = std::filesystem::temp_directory_path() / "lagaboost_model_io_test.json";
    const ModelFile f = grouped_file();
    save_model(f, path.string());
    CHECK(dump_model(load_model(path.string())) == dump_model(f));
    std::filesystem::remove(path);
    CHECK_THROWS(load_model(path.string()));
  }

  TEST_CASE("corrupt documents are rejected") {
    const json good = to_json(grouped_file());
    auto broken = [&](auto edit) {
      json doc = good;
      edit(doc);
      return doc;
    };
    CHECK_THROWS_AS(parse_model("{not json"), ModelFormatError);
    CHECK_THROWS_AS(model_from_json(broken([](json& d) { d["format"] = "other"; })), ModelFormatError);
    CHECK_THROWS_AS(model_from_json(broken([](json& d) { d["version"] = 99; })), ModelFormatError);
    CHECK_THROWS_AS(model_from_json(broken([](json& d) { d.erase("f0"); })), ModelFormatError);
    CHECK_THROWS_AS(model_from_json(broken([](json& d) { d["f0"] = "zero"; })), ModelFormatError);
    CHECK_THROWS_AS(model_from_json(broken([](json& d) { d["model_type"] = "forest"; })), ModelFormatError);
    CHECK_THROWS_AS(model_from_json(broken([](json& d) { d["likelihood"] = "gamma"; })), std::exception);
    CHECK_THROWS_AS(model_from_json(broken([](json& d) { d["num_features"] = 1; })), ModelFormatError);
    CHECK_THROWS_AS(model_from_json(broken([](json& d) { d["latent"]["mode"] = json::array({1.0}); })),
                    ModelFormatError);
  }
}
