#pragma once

#include <Eigen/Dense>
#include <vector>

namespace harnn {

// What the evaluation harness needs from any model: a full score vector
// over real items given a user's chronological history, and the negative
// log likelihood of held-out targets consumed in order.
class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual Eigen::VectorXd rank_scores(int user,
                                      const std::vector<int>& context) = 0;
  virtual std::vector<double> target_nlls(int user,
                                          const std::vector<int>& context,
                                          const std::vector<int>& targets) = 0;
};

}  // namespace harnn
