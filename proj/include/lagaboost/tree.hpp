#pragma once

#include <Eigen/Dense>
#include <vector>

namespace lagaboost {

struct TreeParams {
  int max_depth = 5;
  int min_samples_leaf = 10;
};

/// Least-squares regression tree stored as a flat node array; node 0 is the
/// root. A sample goes left iff x[feature] <= threshold.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    int num_samples = 0;

    friend bool operator==(const Node&, const Node&) = default;
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;
  int num_leaves() const;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<Node> nodes_;
};

/// Greedy top-down growth maximizing the reduction in squared error over all
/// (feature, midpoint between distinct sorted values) candidates. Ties go to
/// the lowest feature index, then the lowest threshold. Growth stops at
/// max_depth, at pure nodes, or when no split leaves min_samples_leaf samples
/// on each side. Rejects empty or non-finite input.
RegressionTree fit_tree(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& targets,
                        const TreeParams& params);

}  // namespace lagaboost
