#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cct/math_types.hpp"

namespace cct {

// Joint point layout: four state channels followed by two effect channels.
inline constexpr int kStateDim = 4;
inline constexpr int kEffectDim = 2;
inline constexpr int kPointDim = kStateDim + kEffectDim;

using Vec6 = Eigen::Matrix<double, kPointDim, 1>;
using Mat6 = Eigen::Matrix<double, kPointDim, kPointDim>;
using VecS = Eigen::Matrix<double, kStateDim, 1>;
using VecD = Eigen::Matrix<double, kEffectDim, 1>;
using MatD = Eigen::Matrix<double, kEffectDim, kEffectDim>;

struct GmmComponent {
  double weight = 0.0;
  Vec6 mean = Vec6::Zero();
  Mat6 cov = Mat6::Identity();
  double support = 0.0;  // accumulated responsibility mass
};

struct IgmmConfig {
  /// Likelihood acceptance relative to a component's peak density; a point
  /// below this fraction for every component spawns a new one. The default
  /// puts the bar at a squared Mahalanobis distance of about 30, far out on
  /// the six-channel chi-squared tail, so clean stationary streams almost
  /// never spawn.
  double novelty_threshold = 3e-7;
  /// Per-channel standard deviation of a freshly spawned component.
  Vec6 initial_std = (Vec6() << 0.05, 0.05, 0.5, 0.05, 0.5, 0.05).finished();
  int max_components = 32;
  /// Components whose means sit within this pooled Mahalanobis distance are
  /// merged, keeping the model compact on stationary streams.
  double merge_distance = 1.5;
  double spd_floor = 1e-12;
};

struct GmrPrediction {
  VecD mean = VecD::Zero();
  MatD cov = MatD::Zero();
};

/// Gaussian mixture over joint state-effect points, updated one point at a
/// time (streaming EM with novelty-based component creation) or fitted in
/// batch and frozen.
class MixtureModel {
 public:
  MixtureModel() = default;
  explicit MixtureModel(IgmmConfig config) : config_(config) {}

  /// Streaming update. Throws std::logic_error on a frozen model.
  void update(const Vec6& point);

  /// Conditional mean and covariance of the effect channels given the state
  /// channels (Gaussian mixture regression). Empty model yields nullopt.
  std::optional<GmrPrediction> predict(const VecS& state) const;

  double log_likelihood(const Vec6& point) const;

  const std::vector<GmmComponent>& components() const { return components_; }
  long observation_count() const { return observation_count_; }
  bool frozen() const { return frozen_; }
  bool fit_warning() const { return fit_warning_; }
  const IgmmConfig& config() const { return config_; }

  std::string to_json_string() const;
  static MixtureModel from_json_string(const std::string& text);

  /// Batch EM fit with a fixed component count; the returned model rejects
  /// further updates. Non-convergence returns the best iterate with the
  /// warning flag set.
  static MixtureModel fit_batch(const std::vector<Vec6>& points, int n_components,
                                const IgmmConfig& config = {}, int max_iters = 200,
                                std::uint64_t seed = 0);

 private:
  IgmmConfig config_;
  std::vector<GmmComponent> components_;
  long observation_count_ = 0;
  bool frozen_ = false;
  bool fit_warning_ = false;

  void spawn(const Vec6& point);
  void normalize_weights();
  void merge_pair(size_t i, size_t j);
  void merge_overlapping();
  void enforce_budget();
};

}  // namespace cct
