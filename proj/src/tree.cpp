#include "lagaboost/tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace lagaboost {

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> level(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.feature >= 0) {
      level[n.left] = level[i] + 1;
      level[n.right] = level[i] + 1;
      deepest = std::max(deepest, level[i] + 1);
    }
  }
  return deepest;
}

int RegressionTree::num_leaves() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int id = 0;
  while (nodes_[id].feature >= 0) {
    const auto& n = nodes_[id];
    id = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[id].value;
}

Eigen::VectorXd RegressionTree::predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  if (nodes_.empty()) throw std::logic_error("predict on an empty tree");
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict_row(X.row(i));
  return out;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& t,
              const TreeParams& params)
      : X_(X), t_(t), params_(params), n_(static_cast<int>(X.rows())), p_(static_cast<int>(X.cols())) {
    sorted_.assign(p_, std::vector<int>(n_));
    for (int f = 0; f < p_; ++f) {
      auto& idx = sorted_[f];
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return X_(a, f) < X_(b, f); });
    }
    goes_left_.assign(n_, 0);
    buffer_.resize(n_);
  }

  RegressionTree build() {
    grow(0, n_, 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    int num_left = 0;
    double gain = 0.0;
  };

  int grow(int begin, int end, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const int count = end - begin;
    const auto& ref = sorted_[0];
    double sum = 0.0, lo = t_[ref[begin]], hi = lo;
    for (int k = begin; k < end; ++k) {
      const double v = t_[ref[k]];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / count;
    nodes_[id].value = mean;
    nodes_[id].num_samples = count;

    if (depth >= params_.max_depth || count < 2 * params_.min_samples_leaf || lo == hi) return id;
    const Split best = find_split(begin, end, mean);
    if (best.feature < 0) return id;

    partition(begin, end, best);
    const int mid = begin + best.num_left;
    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    const int left = grow(begin, mid, depth + 1);
    const int right = grow(mid, end, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  Split find_split(int begin, int end, double mean) const {
    const int count = end - begin;
    const int min_leaf = std::max(1, params_.min_samples_leaf);
    // Centered targets keep the gain formula free of cancellation; the
    // centered total is ~0 so gain = S_L^2 / n_L + S_R^2 / n_R - S^2 / n.
    double total = 0.0;
    for (int k = begin; k < end; ++k) total += t_[sorted_[0][k]] - mean;
    const double base = total * total / count;

    Split best;
    for (int f = 0; f < p_; ++f) {
      const auto& idx = sorted_[f];
      double left_sum = 0.0;
      for (int k = begin; k < end - 1; ++k) {
        left_sum += t_[idx[k]] - mean;
        const int n_left = k - begin + 1;
        const int n_right = count - n_left;
        if (n_left < min_leaf) continue;
        if (n_right < min_leaf) break;
        const double x_here = X_(idx[k], f);
        const double x_next = X_(idx[k + 1], f);
        if (!(x_here < x_next)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / n_left + right_sum * right_sum / n_right - base;
        if (gain > best.gain) {
          double threshold = 0.5 * (x_here + x_next);
          if (!(threshold < x_next)) threshold = x_here;
          best = {f, threshold, n_left, gain};
        }
      }
    }
    return best;
  }

  void partition(int begin, int end, const Split& split) {
    const auto& chosen = sorted_[split.feature];
    for (int k = begin; k < end; ++k) goes_left_[chosen[k]] = (k - begin) < split.num_left;
    for (int f = 0; f < p_; ++f) {
      auto& idx = sorted_[f];
      int l = begin, r = 0;
      for (int k = begin; k < end; ++k) {
        const int s = idx[k];
        if (goes_left_[s]) {
          idx[l++] = s;
        } else {
          buffer_[r++] = s;
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + r, idx.begin() + l);
    }
  }

  const Eigen::Ref<const Eigen::MatrixXd>& X_;
  const Eigen::Ref<const Eigen::VectorXd>& t_;
  TreeParams params_;
  int n_;
  int p_;
  std::vector<std::vector<int>> sorted_;
  std::vector<char> goes_left_;
  std::vector<int> buffer_;
  std::vector<RegressionTree::Node> nodes_;
};

}  // namespace

RegressionTree fit_tree(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& targets,
                        const TreeParams& params) {
  if (X.rows() == 0) throw std::invalid_argument("fit_tree: empty input");
  if (X.rows() != targets.size()) throw std::invalid_argument("fit_tree: X and targets differ in length");
  if (params.max_depth < 0) throw std::invalid_argument("fit_tree: negative max_depth");
  if (!X.allFinite()) throw std::invalid_argument("fit_tree: missing or non-finite feature values are not supported");
  if (!targets.allFinite()) throw std::invalid_argument("fit_tree: non-finite targets");
  return TreeBuilder(X, targets, params).build();
}

}  // namespace lagaboost
