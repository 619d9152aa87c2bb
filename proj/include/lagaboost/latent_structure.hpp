#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace lagaboost {

/// Covariance parameters stored on the log scale, so that any finite vector
/// maps to a valid point of the (positive) parameter domain.
///   grouped: [log sigma2]
///   gp:      [log sigma2, log rho]
struct ThetaVector {
  Eigen::VectorXd log_values;

  ThetaVector() = default;
  explicit ThetaVector(Eigen::VectorXd logs) : log_values(std::move(logs)) {}

  static ThetaVector from_natural(const Eigen::VectorXd& natural);
  Eigen::VectorXd natural() const { return log_values.array().exp(); }
  double natural(Eigen::Index k) const { return std::exp(log_values[k]); }
  Eigen::Index size() const { return log_values.size(); }

  friend bool operator==(const ThetaVector& a, const ThetaVector& b) {
    return a.log_values.size() == b.log_values.size() && a.log_values == b.log_values;
  }
};

/// Single-level grouped random effects. Observation i belongs to group
/// group_index[i] in [0, m); Z is the n x m incidence matrix and is never
/// materialized. Sigma = sigma2 * I_m.
class GroupedStructure {
 public:
  GroupedStructure() = default;
  GroupedStructure(std::vector<int> group_index, int num_groups);

  /// Maps arbitrary integer labels to dense group ids in order of first
  /// appearance.
  static GroupedStructure from_labels(const std::vector<std::int64_t>& labels);

  Eigen::Index num_obs() const { return static_cast<Eigen::Index>(group_index_.size()); }
  Eigen::Index num_effects() const { return num_groups_; }
  const std::vector<int>& group_index() const { return group_index_; }
  const std::vector<int>& group_sizes() const { return group_sizes_; }

  /// Original label of each dense group id (identity labels when built from ids).
  const std::vector<std::int64_t>& labels() const { return labels_; }
  std::optional<int> find_label(std::int64_t label) const;

  /// Z b (gather).
  Eigen::VectorXd apply_z(const Eigen::Ref<const Eigen::VectorXd>& b) const;
  /// Z^T v (scatter-add).
  Eigen::VectorXd apply_z_transpose(const Eigen::Ref<const Eigen::VectorXd>& v) const;

  Eigen::MatrixXd dense_z() const;

 private:
  std::vector<int> group_index_;
  int num_groups_ = 0;
  std::vector<int> group_sizes_;
  std::vector<std::int64_t> labels_;
  std::unordered_map<std::int64_t, int> label_lookup_;
};

/// Spatial Gaussian process with exponential covariance
/// c(s, s') = sigma2 * exp(-|s - s'| / rho). Z = I_n.
class GpStructure {
 public:
  static constexpr double kDefaultJitter = 1e-10;

  GpStructure() = default;
  explicit GpStructure(Eigen::MatrixXd locations, double jitter = kDefaultJitter);

  Eigen::Index num_obs() const { return locations_.rows(); }
  Eigen::Index num_effects() const { return locations_.rows(); }
  const Eigen::MatrixXd& locations() const { return locations_; }
  const Eigen::MatrixXd& distances() const { return distances_; }
  /// Relative diagonal jitter: Sigma_ii = sigma2 * (1 + jitter).
  double jitter() const { return jitter_; }
  double mean_pairwise_distance() const;

  Eigen::VectorXd apply_z(const Eigen::Ref<const Eigen::VectorXd>& b) const { return b; }
  Eigen::VectorXd apply_z_transpose(const Eigen::Ref<const Eigen::VectorXd>& v) const { return v; }

 private:
  Eigen::MatrixXd locations_;
  Eigen::MatrixXd distances_;
  double jitter_ = kDefaultJitter;
};

using LatentStructure = std::variant<GroupedStructure, GpStructure>;

enum class StructureKind { None, Grouped, Gp };
std::string to_string(StructureKind kind);
StructureKind parse_structure(std::string_view name);
StructureKind structure_kind(const LatentStructure& s);

Eigen::Index num_obs(const LatentStructure& s);
Eigen::Index num_effects(const LatentStructure& s);
Eigen::Index num_cov_params(const LatentStructure& s);
std::vector<std::string> cov_param_names(const LatentStructure& s);

/// sigma2 = 1 and, for the GP, rho = mean pairwise distance / 3.
ThetaVector default_theta(const LatentStructure& s);

Eigen::VectorXd apply_z(const LatentStructure& s, const Eigen::Ref<const Eigen::VectorXd>& b);
Eigen::VectorXd apply_z_transpose(const LatentStructure& s, const Eigen::Ref<const Eigen::VectorXd>& v);

/// Covariance representations. The grouped case is a scaled identity and is
/// never expanded; the GP case is a dense symmetric matrix.
struct ScaledIdentity {
  double scale = 1.0;
  Eigen::Index dim = 0;
};
using CovarianceRep = std::variant<ScaledIdentity, Eigen::MatrixXd>;

Eigen::MatrixXd to_dense(const CovarianceRep& rep);

/// Sigma(theta).
CovarianceRep build_sigma(const LatentStructure& s, const ThetaVector& theta);

/// Natural-scale derivative dSigma / dtheta_k (k = 0: sigma2, k = 1: rho).
/// Callers apply the log-scale chain rule themselves.
CovarianceRep dsigma_dtheta(const LatentStructure& s, const ThetaVector& theta, Eigen::Index k);

/// Exponential covariance between two location sets, without jitter.
Eigen::MatrixXd exponential_cross_covariance(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                             const Eigen::Ref<const Eigen::MatrixXd>& b, double sigma2,
                                             double rho);

Eigen::MatrixXd pairwise_distances(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                   const Eigen::Ref<const Eigen::MatrixXd>& b);

/// Cholesky factorization with diagonal jitter escalation: starts at
/// `initial_jitter` (relative to the mean diagonal), multiplies by 10 up to
/// 1e-4 and throws FactorizationError if still not positive definite.
Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(const Eigen::MatrixXd& a, double initial_jitter = 1e-10);

}  // namespace lagaboost
