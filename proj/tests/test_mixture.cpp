#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cct/mixture.hpp"

using namespace cct;

namespace {

Vec6 gaussian_draw(std::mt19937_64& rng, const Vec6& mean, const Vec6& std) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec6 x;
  for (int i = 0; i < kPointDim; ++i) x[i] = mean[i] + std[i] * n(rng);
  return x;
}

Mat6 random_spd(std::mt19937_64& rng, double eig_lo = 0.1, double eig_hi = 2.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat6 a;
  for (int i = 0; i < kPointDim; ++i)
    for (int j = 0; j < kPointDim; ++j) a(i, j) = n(rng);
  const Eigen::HouseholderQR<Mat6> qr(a);
  Mat6 q = qr.householderQ();
  std::uniform_real_distribution<double> u(eig_lo, eig_hi);
  Vec6 eigs;
  for (int i = 0; i < kPointDim; ++i) eigs[i] = u(rng);
  return q * eigs.asDiagonal() * q.transpose();
}

// Independent conditional-Gaussian oracle via explicit block inversion.
VecD conditional_mean_oracle(const Vec6& mean, const Mat6& cov, const VecS& s) {
  const Eigen::Matrix<double, 4, 4> css = cov.topLeftCorner<4, 4>();
  const Eigen::Matrix<double, 2, 4> cds = cov.bottomLeftCorner<2, 4>();
  return mean.tail<2>() + cds * css.inverse() * (s - mean.head<4>());
}

struct ComponentSpecTest {
  double weight;
  Vec6 mean;
  Mat6 cov;
};

// Model with prescribed parameters, built through the documented
// serialization format.
MixtureModel make_model(const std::vector<ComponentSpecTest>& comps) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["frozen"] = false;
  j["fit_warning"] = false;
  j["observation_count"] = 100;
  j["config"] = {{"novelty_threshold", 3e-7},
                 {"initial_std", std::vector<double>(6, 1.0)},
                 {"max_components", 32},
                 {"merge_distance", 1.5},
                 {"spd_floor", 1e-12}};
  j["components"] = nlohmann::json::array();
  for (const auto& c : comps) {
    nlohmann::json jc;
    jc["weight"] = c.weight;
    jc["support"] = c.weight * 100.0;
    jc["mean"] = std::vector<double>(c.mean.data(), c.mean.data() + kPointDim);
    jc["cov"] = std::vector<double>(c.cov.data(), c.cov.data() + kPointDim * kPointDim);
    j["components"].push_back(jc);
  }
  return MixtureModel::from_json_string(j.dump());
}

IgmmConfig unit_config() {
  IgmmConfig cfg;
  cfg.initial_std = Vec6::Ones();
  cfg.merge_distance = 1.5;
  return cfg;
}

}  // namespace

TEST_CASE("first point spawns exactly one component centred on it") {
  MixtureModel model(unit_config());
  Vec6 p;
  p << 0.1, 0.0, 2.0, 0.0, 2.1, 0.0;
  model.update(p);
  REQUIRE(model.components().size() == 1);
  CHECK((model.components()[0].mean - p).norm() == 0.0);
  CHECK(model.components()[0].weight == doctest::Approx(1.0));
}

TEST_CASE("a stationary stream collapses to one or two components near the sample mean") {
  std::mt19937_64 rng(42);
  Vec6 mean;
  mean << 0.5, 0.1, 3.0, 0.2, 3.1, 0.2;
  const Vec6 std = Vec6::Constant(0.3);

  IgmmConfig cfg = unit_config();
  cfg.initial_std = std;
  MixtureModel model(cfg);

  Vec6 sample_sum = Vec6::Zero();
  std::vector<Vec6> pts;
  for (int i = 0; i < 1000; ++i) {
    const Vec6 x = gaussian_draw(rng, mean, std);
    pts.push_back(x);
    sample_sum += x;
    model.update(x);
  }
  const Vec6 sample_mean = sample_sum / 1000.0;

  CHECK(model.components().size() >= 1);
  CHECK(model.components().size() <= 2);

  Vec6 pooled = Vec6::Zero();
  for (const auto& c : model.components()) pooled += c.weight * c.mean;
  const double standard_error = 0.3 / std::sqrt(1000.0);
  for (int i = 0; i < kPointDim; ++i)
    CHECK(std::abs(pooled[i] - sample_mean[i]) <= 3.0 * standard_error);
}

TEST_CASE("well-separated clusters produce one component near each centre") {
  std::mt19937_64 rng(7);
  Vec6 mean_a = Vec6::Zero();
  Vec6 mean_b = Vec6::Constant(5.0);  // 10 sigma apart per axis at sigma 0.5
  const Vec6 std = Vec6::Constant(0.5);

  IgmmConfig cfg = unit_config();
  cfg.initial_std = std;
  MixtureModel model(cfg);

  std::vector<Vec6> pts;
  for (int i = 0; i < 400; ++i) {
    const Vec6 xa = gaussian_draw(rng, mean_a, std);
    const Vec6 xb = gaussian_draw(rng, mean_b, std);
    model.update(xa);
    model.update(xb);
    pts.push_back(xa);
    pts.push_back(xb);
  }
  REQUIRE(model.components().size() >= 2);

  // Batch EM on the same stream as the reference for the cluster centres.
  MixtureModel batch = MixtureModel::fit_batch(pts, 2, cfg, 200, 3);
  for (const auto& ref : batch.components()) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : model.components())
      best = std::min(best, (c.mean - ref.mean).norm());
    CHECK(best < 0.5);
  }
}

TEST_CASE("weights stay normalised and covariances positive definite through updates") {
  std::mt19937_64 rng(11);
  IgmmConfig cfg = unit_config();
  cfg.initial_std = Vec6::Constant(0.4);
  MixtureModel model(cfg);
  Vec6 mean = Vec6::Zero();
  for (int i = 0; i < 500; ++i) {
    if (i == 250) mean = Vec6::Constant(3.0);  // regime change mid-stream
    const Vec6 x = gaussian_draw(rng, mean, Vec6::Constant(0.4));

    const double before = model.components().empty()
                              ? -std::numeric_limits<double>::infinity()
                              : model.log_likelihood(x);
    model.update(x);
    const double after = model.log_likelihood(x);
    CHECK(after >= before - 1e-9);

    double weight_sum = 0.0;
    for (const auto& c : model.components()) {
      weight_sum += c.weight;
      const Eigen::LLT<Mat6> llt(c.cov);
      CHECK(llt.info() == Eigen::Success);
    }
    CHECK(std::abs(weight_sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("component budget is enforced by merging the closest pair") {
  IgmmConfig cfg = unit_config();
  cfg.initial_std = Vec6::Constant(0.05);
  cfg.max_components = 4;
  cfg.merge_distance = 0.0;  // only the budget path merges
  MixtureModel model(cfg);
  for (int i = 0; i < 12; ++i) {
    Vec6 x = Vec6::Constant(static_cast<double>(i));  // every point novel
    model.update(x);
    CHECK(static_cast<int>(model.components().size()) <= 4);
  }
}

TEST_CASE("prediction with zero cross-covariance returns the effect mean") {
  MixtureModel model = [] {
    IgmmConfig cfg = unit_config();
    MixtureModel m(cfg);
    Vec6 p;
    p << 1.0, 0.5, 2.0, 0.1, 4.0, 0.3;
    m.update(p);  // single diagonal component at p
    return m;
  }();
  VecS query;
  query << -3.0, 2.0, 7.0, 0.9;
  const auto pred = model.predict(query);
  REQUIRE(pred.has_value());
  CHECK(pred->mean[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(pred->mean[1] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("single full-covariance component matches the conditional oracle") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Mat6 cov = random_spd(rng);
    Vec6 mean;
    for (int i = 0; i < kPointDim; ++i) mean[i] = n(rng);

    const MixtureModel model =
        make_model({{1.0, mean, cov}});

    VecS query;
    for (int i = 0; i < kStateDim; ++i) query[i] = n(rng);
    const auto pred = model.predict(query);
    REQUIRE(pred.has_value());
    const VecD oracle = conditional_mean_oracle(mean, cov, query);
    CHECK((pred->mean - oracle).norm() <= 1e-9);

    // Conditional covariance against the Schur complement.
    const Eigen::Matrix<double, 4, 4> css = cov.topLeftCorner<4, 4>();
    const Eigen::Matrix<double, 2, 4> cds = cov.bottomLeftCorner<2, 4>();
    const MatD schur =
        cov.bottomRightCorner<2, 2>() - cds * css.inverse() * cds.transpose();
    CHECK((pred->cov - schur).norm() <= 1e-9);
  }
}

TEST_CASE("a query deep in one component's basin saturates its responsibility") {
  Vec6 mean_a = Vec6::Zero();
  Vec6 mean_b = Vec6::Constant(30.0);
  std::mt19937_64 rng(202);
  const Mat6 cov_a = random_spd(rng);
  const Mat6 cov_b = random_spd(rng);
  const MixtureModel model = make_model({{0.5, mean_a, cov_a}, {0.5, mean_b, cov_b}});

  VecS query;
  query << 0.2, -0.1, 0.3, 0.05;  // far inside component a's basin
  const auto pred = model.predict(query);
  REQUIRE(pred.has_value());
  const VecD oracle = conditional_mean_oracle(mean_a, cov_a, query);
  CHECK((pred->mean - oracle).norm() <= 1e-6);
}

TEST_CASE("identical points batch-fit to a single regularised component") {
  std::vector<Vec6> pts(50, Vec6::Constant(1.5));
  const MixtureModel model = MixtureModel::fit_batch(pts, 3, unit_config(), 50, 1);
  int effective = 0;
  for (const auto& c : model.components())
    if (c.weight > 1e-6) ++effective;
  CHECK(effective >= 1);
  for (const auto& c : model.components()) {
    const Eigen::LLT<Mat6> llt(c.cov);
    CHECK(llt.info() == Eigen::Success);  // jittered, not singular
  }
}

TEST_CASE("frozen batch models reject further updates") {
  std::vector<Vec6> pts;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) pts.push_back(gaussian_draw(rng, Vec6::Zero(), Vec6::Ones()));
  MixtureModel model = MixtureModel::fit_batch(pts, 2, unit_config(), 100, 2);
  CHECK(model.frozen());
  CHECK_THROWS_AS(model.update(Vec6::Zero()), std::logic_error);
}

TEST_CASE("batch and incremental fits agree on the stream likelihood within a band") {
  std::mt19937_64 rng(21);
  IgmmConfig cfg = unit_config();
  cfg.initial_std = Vec6::Constant(0.5);
  MixtureModel inc(cfg);
  std::vector<Vec6> pts;
  for (int i = 0; i < 600; ++i) {
    const Vec6 x = gaussian_draw(rng, Vec6::Constant(1.0), Vec6::Constant(0.5));
    pts.push_back(x);
    inc.update(x);
  }
  const MixtureModel batch = MixtureModel::fit_batch(pts, 2, cfg, 200, 9);

  double ll_inc = 0.0, ll_batch = 0.0;
  for (const auto& p : pts) {
    ll_inc += inc.log_likelihood(p);
    ll_batch += batch.log_likelihood(p);
  }
  ll_inc /= static_cast<double>(pts.size());
  ll_batch /= static_cast<double>(pts.size());
  CHECK(std::abs(ll_inc - ll_batch) < 1.0);  // nats per point
}

TEST_CASE("serialization round-trips every parameter bit-exactly") {
  std::mt19937_64 rng(33);
  IgmmConfig cfg = unit_config();
  cfg.initial_std = Vec6::Constant(0.7);
  MixtureModel model(cfg);
  for (int i = 0; i < 200; ++i)
    model.update(gaussian_draw(rng, Vec6::Constant(0.3), Vec6::Constant(0.7)));

  const std::string text = model.to_json_string();
  const MixtureModel restored = MixtureModel::from_json_string(text);
  REQUIRE(restored.components().size() == model.components().size());
  for (size_t i = 0; i < model.components().size(); ++i) {
    CHECK(restored.components()[i].weight == model.components()[i].weight);
    CHECK(restored.components()[i].support == model.components()[i].support);
    CHECK((restored.components()[i].mean - model.components()[i].mean).norm() == 0.0);
    CHECK((restored.components()[i].cov - model.components()[i].cov).norm() == 0.0);
  }
  CHECK(restored.observation_count() == model.observation_count());
}

TEST_CASE("empty model declines to predict") {
  MixtureModel model(unit_config());
  CHECK_FALSE(model.predict(VecS::Zero()).has_value());
}
