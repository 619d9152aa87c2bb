#include "lagaboost/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lagaboost {

namespace {

void check_lengths(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("metric inputs differ in length");
}

}  // namespace

double error_rate(const Eigen::VectorXd& y, const Eigen::VectorXd& prob) {
  check_lengths(y, prob);
  if (y.size() == 0) return 0.0;
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const bool predicted = prob[i] >= 0.5;
    if (predicted != (y[i] > 0.5)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

double log_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& prob) {
  check_lengths(y, prob);
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = std::clamp(prob[i], 1e-15, 1.0 - 1e-15);
    total -= y[i] > 0.5 ? std::log(p) : std::log1p(-p);
  }
  return total;
}

std::optional<double> auc(const Eigen::VectorXd& y, const Eigen::VectorXd& score) {
  check_lengths(y, score);
  const Eigen::Index n = y.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] < score[b]; });
  double rank_sum_pos = 0.0;
  Eigen::Index n_pos = 0;
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j + 1 < n && score[order[j + 1]] == score[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) {
      if (y[order[k]] > 0.5) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const Eigen::Index n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
  check_lengths(y, pred);
  if (y.size() == 0) return 0.0;
  return std::sqrt((y - pred).squaredNorm() / static_cast<double>(y.size()));
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired t-test needs equal lengths");
  if (a.size() < 2) throw std::invalid_argument("paired t-test needs at least two pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  TTestResult r;
  r.df = static_cast<double>(diff.size() - 1);
  const double mu = mean(diff);
  const double se = stddev(diff) / std::sqrt(static_cast<double>(diff.size()));
  if (se == 0.0) {
    r.statistic = mu == 0.0 ? 0.0 : std::copysign(INFINITY, mu);
    r.p_value = mu == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.statistic = mu / se;
  const boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)));
  return r;
}

ParamError parameter_error(const std::vector<double>& estimates, double truth) {
  ParamError e;
  if (estimates.empty()) return e;
  double ss = 0.0, sum = 0.0;
  for (double x : estimates) {
    ss += (x - truth) * (x - truth);
    sum += x - truth;
  }
  e.rmse = std::sqrt(ss / static_cast<double>(estimates.size()));
  e.bias = sum / static_cast<double>(estimates.size());
  return e;
}

}  // namespace lagaboost
