#include "lagaboost/latent_structure.hpp"

#include <cmath>
#include <stdexcept>

#include "lagaboost/detail/overloaded.hpp"
#include "lagaboost/errors.hpp"

namespace lagaboost {

ThetaVector ThetaVector::from_natural(const Eigen::VectorXd& natural) {
  if ((natural.array() <= 0.0).any() || !natural.allFinite()) {
    throw std::domain_error("covariance parameters must be finite and strictly positive");
  }
  return ThetaVector(natural.array().log().matrix());
}

// ---------------------------------------------------------------------------
// Grouped

GroupedStructure::GroupedStructure(std::vector<int> group_index, int num_groups)
    : group_index_(std::move(group_index)), num_groups_(num_groups), group_sizes_(num_groups, 0) {
  if (num_groups < 0) throw std::invalid_argument("negative number of groups");
  for (std::size_t i = 0; i < group_index_.size(); ++i) {
    const int g = group_index_[i];
    if (g < 0 || g >= num_groups) {
      throw std::invalid_argument("group id " + std::to_string(g) + " at row " + std::to_string(i) +
                                  " outside [0, " + std::to_string(num_groups) + ")");
    }
    ++group_sizes_[g];
  }
  labels_.resize(num_groups);
  for (int g = 0; g < num_groups; ++g) {
    labels_[g] = g;
    label_lookup_[g] = g;
  }
}

GroupedStructure GroupedStructure::from_labels(const std::vector<std::int64_t>& labels) {
  std::unordered_map<std::int64_t, int> lookup;
  std::vector<std::int64_t> ordered;
  std::vector<int> index(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = lookup.try_emplace(labels[i], static_cast<int>(ordered.size()));
    if (inserted) ordered.push_back(labels[i]);
    index[i] = it->second;
  }
  GroupedStructure s(std::move(index), static_cast<int>(ordered.size()));
  s.labels_ = std::move(ordered);
  s.label_lookup_ = std::move(lookup);
  return s;
}

std::optional<int> GroupedStructure::find_label(std::int64_t label) const {
  auto it = label_lookup_.find(label);
  if (it == label_lookup_.end()) return std::nullopt;
  return it->second;
}

Eigen::VectorXd GroupedStructure::apply_z(const Eigen::Ref<const Eigen::VectorXd>& b) const {
  if (b.size() != num_groups_) throw std::invalid_argument("apply_z: expected length m");
  Eigen::VectorXd out(num_obs());
  for (Eigen::Index i = 0; i < num_obs(); ++i) out[i] = b[group_index_[i]];
  return out;
}

Eigen::VectorXd GroupedStructure::apply_z_transpose(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (v.size() != num_obs()) throw std::invalid_argument("apply_z_transpose: expected length n");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_groups_);
  for (Eigen::Index i = 0; i < num_obs(); ++i) out[group_index_[i]] += v[i];
  return out;
}

Eigen::MatrixXd GroupedStructure::dense_z() const {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(num_obs(), num_groups_);
  for (Eigen::Index i = 0; i < num_obs(); ++i) z(i, group_index_[i]) = 1.0;
  return z;
}

// ---------------------------------------------------------------------------
// Gaussian process

Eigen::MatrixXd pairwise_distances(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                   const Eigen::Ref<const Eigen::MatrixXd>& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("pairwise_distances: dimension mismatch");
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) d(i, j) = (a.row(i) - b.row(j)).norm();
  }
  return d;
}

GpStructure::GpStructure(Eigen::MatrixXd locations, double jitter)
    : locations_(std::move(locations)), jitter_(jitter) {
  if (!locations_.allFinite()) throw std::invalid_argument("GP locations must be finite");
  distances_ = pairwise_distances(locations_, locations_);
}

double GpStructure::mean_pairwise_distance() const {
  const Eigen::Index n = num_obs();
  if (n < 2) return 1.0;
  return distances_.sum() / static_cast<double>(n * (n - 1));
}

Eigen::MatrixXd exponential_cross_covariance(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                             const Eigen::Ref<const Eigen::MatrixXd>& b, double sigma2,
                                             double rho) {
  return (sigma2 * (-pairwise_distances(a, b).array() / rho).exp()).matrix();
}

// ---------------------------------------------------------------------------
// Variant helpers

using detail::overloaded;

std::string to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::None: return "none";
    case StructureKind::Grouped: return "grouped";
    case StructureKind::Gp: return "gp";
  }
  return "unknown";
}

StructureKind parse_structure(std::string_view name) {
  if (name == "grouped") return StructureKind::Grouped;
  if (name == "gp") return StructureKind::Gp;
  if (name == "none") return StructureKind::None;
  throw std::invalid_argument("unknown structure '" + std::string(name) + "'");
}

StructureKind structure_kind(const LatentStructure& s) {
  return std::holds_alternative<GroupedStructure>(s) ? StructureKind::Grouped : StructureKind::Gp;
}

Eigen::Index num_obs(const LatentStructure& s) {
  return std::visit([](const auto& x) { return x.num_obs(); }, s);
}

Eigen::Index num_effects(const LatentStructure& s) {
  return std::visit([](const auto& x) { return x.num_effects(); }, s);
}

Eigen::Index num_cov_params(const LatentStructure& s) {
  return std::holds_alternative<GroupedStructure>(s) ? 1 : 2;
}

std::vector<std::string> cov_param_names(const LatentStructure& s) {
  if (std::holds_alternative<GroupedStructure>(s)) return {"sigma2"};
  return {"sigma2", "rho"};
}

ThetaVector default_theta(const LatentStructure& s) {
  return std::visit(overloaded{
                        [](const GroupedStructure&) { return ThetaVector(Eigen::VectorXd::Zero(1)); },
                        [](const GpStructure& gp) {
                          Eigen::VectorXd logs(2);
                          logs << 0.0, std::log(gp.mean_pairwise_distance() / 3.0);
                          return ThetaVector(logs);
                        },
                    },
                    s);
}

Eigen::VectorXd apply_z(const LatentStructure& s, const Eigen::Ref<const Eigen::VectorXd>& b) {
  return std::visit([&](const auto& x) { return x.apply_z(b); }, s);
}

Eigen::VectorXd apply_z_transpose(const LatentStructure& s, const Eigen::Ref<const Eigen::VectorXd>& v) {
  return std::visit([&](const auto& x) { return x.apply_z_transpose(v); }, s);
}

Eigen::MatrixXd to_dense(const CovarianceRep& rep) {
  return std::visit(overloaded{
                        [](const ScaledIdentity& id) -> Eigen::MatrixXd {
                          return id.scale * Eigen::MatrixXd::Identity(id.dim, id.dim);
                        },
                        [](const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return m; },
                    },
                    rep);
}

namespace {

void check_theta(const LatentStructure& s, const ThetaVector& theta) {
  if (theta.size() != num_cov_params(s)) throw std::invalid_argument("theta has wrong length for structure");
  if (!theta.log_values.allFinite()) throw std::domain_error("theta must be finite");
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double v = theta.natural(k);
    if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error("covariance parameter out of domain");
  }
}

}  // namespace

CovarianceRep build_sigma(const LatentStructure& s, const ThetaVector& theta) {
  check_theta(s, theta);
  const double sigma2 = theta.natural(0);
  return std::visit(overloaded{
                        [&](const GroupedStructure& g) -> CovarianceRep {
                          return ScaledIdentity{sigma2, g.num_effects()};
                        },
                        [&](const GpStructure& gp) -> CovarianceRep {
                          const double rho = theta.natural(1);
                          Eigen::MatrixXd sigma = (sigma2 * (-gp.distances().array() / rho).exp()).matrix();
                          sigma.diagonal().array() += sigma2 * gp.jitter();
                          return sigma;
                        },
                    },
                    s);
}

CovarianceRep dsigma_dtheta(const LatentStructure& s, const ThetaVector& theta, Eigen::Index k) {
  if (k < 0 || k >= num_cov_params(s)) throw std::out_of_range("dsigma_dtheta: parameter index out of range");
  check_theta(s, theta);
  return std::visit(overloaded{
                        [&](const GroupedStructure& g) -> CovarianceRep { return ScaledIdentity{1.0, g.num_effects()}; },
                        [&](const GpStructure& gp) -> CovarianceRep {
                          const double sigma2 = theta.natural(0);
                          const double rho = theta.natural(1);
                          Eigen::MatrixXd base = (-gp.distances().array() / rho).exp().matrix();
                          base.diagonal().array() += gp.jitter();
                          if (k == 0) return base;
                          return (sigma2 * base.array() * gp.distances().array() / (rho * rho)).matrix();
                        },
                    },
                    s);
}

Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(const Eigen::MatrixXd& a, double initial_jitter) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  const double scale = a.diagonal().mean();
  for (double jitter = initial_jitter; jitter <= 1e-4 * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter * scale;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw FactorizationError("matrix not positive definite after jitter escalation to 1e-4");
}

}  // namespace lagaboost
