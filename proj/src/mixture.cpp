#include "cct/mixture.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "cct/rng.hpp"

namespace cct {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

/// Clamp eigenvalues from below; returns the input untouched when already
/// comfortably positive definite.
Mat6 ensure_spd(const Mat6& m, double floor) {
  const Mat6 sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat6> eig(sym);
  const double lo = eig.eigenvalues().minCoeff();
  const double abs_floor = std::max(floor, floor * sym.trace());
  if (lo >= abs_floor) return sym;
  Vec6 fixed = eig.eigenvalues();
  for (int i = 0; i < kPointDim; ++i) fixed[i] = std::max(fixed[i], abs_floor);
  return eig.eigenvectors() * fixed.asDiagonal() * eig.eigenvectors().transpose();
}

struct GaussianEval {
  double log_density;
  double maha_sq;
};

GaussianEval eval_gaussian(const Vec6& x, const Vec6& mean, const Mat6& cov) {
  const Eigen::LLT<Mat6> llt(cov);
  if (llt.info() != Eigen::Success) {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  const Vec6 d = x - mean;
  const Vec6 z = llt.matrixL().solve(d);
  const double maha_sq = z.squaredNorm();
  double log_det = 0.0;
  for (int i = 0; i < kPointDim; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return {-0.5 * (maha_sq + log_det + kPointDim * kLog2Pi), maha_sq};
}

}  // namespace

void MixtureModel::spawn(const Vec6& point) {
  GmmComponent c;
  c.mean = point;
  c.cov = config_.initial_std.cwiseProduct(config_.initial_std).asDiagonal();
  c.cov = ensure_spd(c.cov, config_.spd_floor);
  c.support = 1.0;
  components_.push_back(c);
  normalize_weights();
}

void MixtureModel::normalize_weights() {
  double total = 0.0;
  for (const auto& c : components_) total += c.support;
  if (total <= 0.0) return;
  for (auto& c : components_) c.weight = c.support / total;
}

void MixtureModel::merge_pair(size_t i, size_t j) {
  GmmComponent& a = components_[i];
  const GmmComponent& b = components_[j];
  const double sp = a.support + b.support;
  const double wa = a.support / sp;
  const double wb = b.support / sp;
  const Vec6 mean = wa * a.mean + wb * b.mean;
  const Vec6 da = a.mean - mean;
  const Vec6 db = b.mean - mean;
  a.cov = ensure_spd(wa * (a.cov + da * da.transpose()) + wb * (b.cov + db * db.transpose()),
                     config_.spd_floor);
  a.mean = mean;
  a.support = sp;
  components_.erase(components_.begin() + static_cast<long>(j));
  normalize_weights();
}

void MixtureModel::merge_overlapping() {
  if (config_.merge_distance <= 0.0) return;
  bool merged = true;
  while (merged && components_.size() > 1) {
    merged = false;
    for (size_t i = 0; i < components_.size() && !merged; ++i) {
      for (size_t j = i + 1; j < components_.size() && !merged; ++j) {
        const Mat6 pooled = 0.5 * (components_[i].cov + components_[j].cov);
        const Eigen::LLT<Mat6> llt(pooled);
        if (llt.info() != Eigen::Success) continue;
        const Vec6 d = components_[i].mean - components_[j].mean;
        const double maha = llt.matrixL().solve(d).norm();
        if (maha < config_.merge_distance) {
          merge_pair(i, j);
          merged = true;
        }
      }
    }
  }
}

void MixtureModel::enforce_budget() {
  while (static_cast<int>(components_.size()) > config_.max_components) {
    double best = std::numeric_limits<double>::infinity();
    size_t bi = 0, bj = 1;
    for (size_t i = 0; i < components_.size(); ++i)
      for (size_t j = i + 1; j < components_.size(); ++j) {
        const double d = (components_[i].mean - components_[j].mean).norm();
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    merge_pair(bi, bj);
  }
}

void MixtureModel::update(const Vec6& point) {
  if (frozen_) throw std::logic_error("cannot update a frozen mixture model");
  if (!point.allFinite()) throw std::invalid_argument("mixture update needs a finite point");

  ++observation_count_;
  if (components_.empty()) {
    spawn(point);
    return;
  }

  // Novelty: accept only if some component sees the point within the
  // configured fraction of its peak density.
  const double maha_limit = -2.0 * std::log(config_.novelty_threshold);
  std::vector<GaussianEval> evals(components_.size());
  bool accepted = false;
  for (size_t j = 0; j < components_.size(); ++j) {
    evals[j] = eval_gaussian(point, components_[j].mean, components_[j].cov);
    if (evals[j].maha_sq <= maha_limit) accepted = true;
  }

  if (!accepted) {
    spawn(point);
    enforce_budget();
    return;
  }

  // Responsibilities via log-sum-exp.
  std::vector<double> logp(components_.size());
  double max_logp = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < components_.size(); ++j) {
    logp[j] = std::log(components_[j].weight) + evals[j].log_density;
    max_logp = std::max(max_logp, logp[j]);
  }
  double denom = 0.0;
  for (double lp : logp) denom += std::exp(lp - max_logp);

  for (size_t j = 0; j < components_.size(); ++j) {
    const double resp = std::exp(logp[j] - max_logp) / denom;
    GmmComponent& c = components_[j];
    c.support += resp;
    const double w = resp / c.support;
    const Vec6 err_old = point - c.mean;
    c.mean += w * err_old;
    // Exact weighted running covariance; positive semi-definite by
    // construction, unlike the delta-subtraction form.
    Mat6 cov = (1.0 - w) * c.cov + (w * (1.0 - w)) * (err_old * err_old.transpose());
    c.cov = ensure_spd(cov, config_.spd_floor);
  }
  normalize_weights();
  merge_overlapping();
}

std::optional<GmrPrediction> MixtureModel::predict(const VecS& state) const {
  if (components_.empty()) return std::nullopt;

  using MatS = Eigen::Matrix<double, kStateDim, kStateDim>;
  using MatDS = Eigen::Matrix<double, kEffectDim, kStateDim>;

  const size_t n = components_.size();
  std::vector<double> log_resp(n);
  std::vector<VecD> cond_mean(n);
  std::vector<MatD> cond_cov(n);
  double max_lr = -std::numeric_limits<double>::infinity();

  for (size_t j = 0; j < n; ++j) {
    const auto& c = components_[j];
    const VecS mean_s = c.mean.head<kStateDim>();
    const VecD mean_d = c.mean.tail<kEffectDim>();
    const MatS cov_ss = c.cov.topLeftCorner<kStateDim, kStateDim>();
    const MatDS cov_ds = c.cov.bottomLeftCorner<kEffectDim, kStateDim>();
    const MatD cov_dd = c.cov.bottomRightCorner<kEffectDim, kEffectDim>();

    const Eigen::LLT<MatS> llt(cov_ss);
    if (llt.info() != Eigen::Success) {
      log_resp[j] = -std::numeric_limits<double>::infinity();
      cond_mean[j].setZero();
      cond_cov[j].setZero();
      continue;
    }
    const VecS d = state - mean_s;
    const VecS z = llt.matrixL().solve(d);
    double log_det = 0.0;
    for (int i = 0; i < kStateDim; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
    log_resp[j] = std::log(c.weight) -
                  0.5 * (z.squaredNorm() + log_det + kStateDim * kLog2Pi);

    const VecS gain = llt.solve(d);  // cov_ss^{-1} (s - mean_s)
    cond_mean[j] = mean_d + cov_ds * gain;
    cond_cov[j] = cov_dd - cov_ds * llt.solve(cov_ds.transpose());
    max_lr = std::max(max_lr, log_resp[j]);
  }

  if (!std::isfinite(max_lr)) return std::nullopt;

  double denom = 0.0;
  for (double lr : log_resp) denom += std::exp(lr - max_lr);

  GmrPrediction out;
  for (size_t j = 0; j < n; ++j) {
    const double h = std::exp(log_resp[j] - max_lr) / denom;
    out.mean += h * cond_mean[j];
  }
  for (size_t j = 0; j < n; ++j) {
    const double h = std::exp(log_resp[j] - max_lr) / denom;
    const VecD dm = cond_mean[j] - out.mean;
    out.cov += h * (cond_cov[j] + dm * dm.transpose());
  }
  return out;
}

double MixtureModel::log_likelihood(const Vec6& point) const {
  if (components_.empty()) return -std::numeric_limits<double>::infinity();
  double max_lp = -std::numeric_limits<double>::infinity();
  std::vector<double> logp(components_.size());
  for (size_t j = 0; j < components_.size(); ++j) {
    const auto ev = eval_gaussian(point, components_[j].mean, components_[j].cov);
    logp[j] = std::log(components_[j].weight) + ev.log_density;
    max_lp = std::max(max_lp, logp[j]);
  }
  if (!std::isfinite(max_lp)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double lp : logp) acc += std::exp(lp - max_lp);
  return max_lp + std::log(acc);
}

MixtureModel MixtureModel::fit_batch(const std::vector<Vec6>& points, int n_components,
                                     const IgmmConfig& config, int max_iters,
                                     std::uint64_t seed) {
  if (points.empty()) throw std::invalid_argument("fit_batch needs at least one point");
  n_components = std::min<int>(n_components, static_cast<int>(points.size()));

  MixtureModel model(config);
  model.components_.resize(n_components);

  // Initial means spread over the stream; k-means++-style seeding keeps the
  // pick deterministic under the given seed.
  Rng rng(seed);
  std::vector<Vec6> centers;
  centers.push_back(points[static_cast<size_t>(rng.uniform01() * points.size()) % points.size()]);
  while (static_cast<int>(centers.size()) < n_components) {
    std::vector<double> d2(points.size());
    double total = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, (points[i] - c).squaredNorm());
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(points[centers.size() % points.size()]);
      continue;
    }
    double pick = rng.uniform01() * total;
    size_t idx = 0;
    for (; idx + 1 < points.size(); ++idx) {
      pick -= d2[idx];
      if (pick <= 0.0) break;
    }
    centers.push_back(points[idx]);
  }

  const Mat6 init_cov = ensure_spd(
      Mat6(config.initial_std.cwiseProduct(config.initial_std).asDiagonal()), config.spd_floor);
  for (int j = 0; j < n_components; ++j) {
    model.components_[j].mean = centers[j];
    model.components_[j].cov = init_cov;
    model.components_[j].weight = 1.0 / n_components;
    model.components_[j].support = static_cast<double>(points.size()) / n_components;
  }

  const size_t n = points.size();
  const int k = n_components;
  Eigen::MatrixXd resp(n, k);
  double prev_ll = -std::numeric_limits<double>::infinity();
  double best_ll = -std::numeric_limits<double>::infinity();
  std::vector<GmmComponent> best = model.components_;
  bool converged = false;

  for (int iter = 0; iter < max_iters; ++iter) {
    // E step.
    double ll = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double max_lp = -std::numeric_limits<double>::infinity();
      std::vector<double> logp(k);
      for (int j = 0; j < k; ++j) {
        const auto ev = eval_gaussian(points[i], model.components_[j].mean,
                                      model.components_[j].cov);
        logp[j] = std::log(model.components_[j].weight) + ev.log_density;
        max_lp = std::max(max_lp, logp[j]);
      }
      double denom = 0.0;
      for (int j = 0; j < k; ++j) denom += std::exp(logp[j] - max_lp);
      for (int j = 0; j < k; ++j) resp(i, j) = std::exp(logp[j] - max_lp) / denom;
      ll += max_lp + std::log(denom);
    }
    if (ll > best_ll) {
      best_ll = ll;
      best = model.components_;
    }
    if (iter > 0 && std::abs(ll - prev_ll) <= 1e-9 * (1.0 + std::abs(ll))) {
      converged = true;
      break;
    }
    prev_ll = ll;

    // M step.
    for (int j = 0; j < k; ++j) {
      const double nk = resp.col(j).sum();
      if (nk < 1e-12) continue;
      Vec6 mean = Vec6::Zero();
      for (size_t i = 0; i < n; ++i) mean += resp(i, j) * points[i];
      mean /= nk;
      Mat6 cov = Mat6::Zero();
      for (size_t i = 0; i < n; ++i) {
        const Vec6 d = points[i] - mean;
        cov += resp(i, j) * (d * d.transpose());
      }
      cov /= nk;
      model.components_[j].mean = mean;
      model.components_[j].cov = ensure_spd(cov, std::max(config.spd_floor, 1e-10));
      model.components_[j].weight = nk / static_cast<double>(n);
      model.components_[j].support = nk;
    }
  }

  model.components_ = best;
  model.observation_count_ = static_cast<long>(n);
  model.fit_warning_ = !converged;
  model.frozen_ = true;
  return model;
}

using nlohmann::json;

std::string MixtureModel::to_json_string() const {
  json j;
  j["format_version"] = 1;
  j["frozen"] = frozen_;
  j["fit_warning"] = fit_warning_;
  j["observation_count"] = observation_count_;
  j["config"] = {
      {"novelty_threshold", config_.novelty_threshold},
      {"initial_std", std::vector<double>(config_.initial_std.data(),
                                          config_.initial_std.data() + kPointDim)},
      {"max_components", config_.max_components},
      {"merge_distance", config_.merge_distance},
      {"spd_floor", config_.spd_floor},
  };
  j["components"] = json::array();
  for (const auto& c : components_) {
    json jc;
    jc["weight"] = c.weight;
    jc["support"] = c.support;
    jc["mean"] = std::vector<double>(c.mean.data(), c.mean.data() + kPointDim);
    std::vector<double> cov(c.cov.data(), c.cov.data() + kPointDim * kPointDim);
    jc["cov"] = cov;
    j["components"].push_back(jc);
  }
  return j.dump();
}

MixtureModel MixtureModel::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("unsupported mixture model format version");
  MixtureModel m;
  m.frozen_ = j.at("frozen").get<bool>();
  m.fit_warning_ = j.value("fit_warning", false);
  m.observation_count_ = j.at("observation_count").get<long>();
  const auto& jc = j.at("config");
  m.config_.novelty_threshold = jc.at("novelty_threshold").get<double>();
  const auto istd = jc.at("initial_std").get<std::vector<double>>();
  for (int i = 0; i < kPointDim; ++i) m.config_.initial_std[i] = istd.at(i);
  m.config_.max_components = jc.at("max_components").get<int>();
  m.config_.merge_distance = jc.at("merge_distance").get<double>();
  m.config_.spd_floor = jc.at("spd_floor").get<double>();
  for (const auto& comp : j.at("components")) {
    GmmComponent c;
    c.weight = comp.at("weight").get<double>();
    c.support = comp.at("support").get<double>();
    const auto mean = comp.at("mean").get<std::vector<double>>();
    for (int i = 0; i < kPointDim; ++i) c.mean[i] = mean.at(i);
    const auto cov = comp.at("cov").get<std::vector<double>>();
    for (int i = 0; i < kPointDim * kPointDim; ++i) c.cov.data()[i] = cov.at(i);
    m.components_.push_back(c);
  }
  return m;
}

}  // namespace cct
