#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "harnn/config.hpp"
#include "harnn/dataset.hpp"
#include "harnn/param_store.hpp"
#include "harnn/ranker.hpp"
#include "harnn/rng.hpp"

namespace harnn {

// Most-popular-first. Likelihoods come from laplace-smoothed train counts,
// so uniform counts give perplexity |I|.
class PopModel : public Ranker {
 public:
  void fit(const std::vector<Interaction>& train, int num_items);

  Eigen::VectorXd rank_scores(int user, const std::vector<int>& context) override;
  std::vector<double> target_nlls(int user, const std::vector<int>& context,
                                  const std::vector<int>& targets) override;

  std::vector<std::pair<std::string, Eigen::MatrixXd*>> parameters();

 private:
  Eigen::MatrixXd counts_;  // |I| x 1
};

// Bilinear matrix factorization over the heterogeneous representations:
// s(u, i) is the dot product of the two attribute-combined vectors. Trained
// per interaction with a full softmax over items; the user vector passes
// through two dropout sites.
class NhmfModel : public Ranker {
 public:
  void init(const Dataset& ds, const TrainConfig& cfg, Rng& rng);
  void train(const std::vector<Interaction>& train,
             const std::vector<Interaction>& dev, const TrainConfig& cfg,
             std::vector<EpochRow>* log);

  Eigen::VectorXd rank_scores(int user, const std::vector<int>& context) override;
  std::vector<double> target_nlls(int user, const std::vector<int>& context,
                                  const std::vector<int>& targets) override;

  // mean nll of the rows under the current parameters
  double dataset_nll(const std::vector<Interaction>& rows) const;

  std::vector<std::pair<std::string, Eigen::MatrixXd*>> parameters();

 private:
  Eigen::VectorXd user_vec(int user) const;

  ParamStore store_;
  EntityCodes codes_;
  std::vector<Eigen::MatrixXd> grads_;
  std::vector<Eigen::MatrixXd> acc_;
};

}  // namespace harnn
