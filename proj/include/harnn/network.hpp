#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "harnn/cell.hpp"
#include "harnn/config.hpp"
#include "harnn/dataset.hpp"
#include "harnn/param_store.hpp"
#include "harnn/rng.hpp"
#include "harnn/sequences.hpp"

namespace harnn {

struct LossStat {
  double nll_sum = 0.0;
  std::int64_t positions = 0;

  double mean() const { return positions ? nll_sum / positions : 0.0; }
  double perplexity() const { return std::exp(mean()); }
  LossStat& operator+=(const LossStat& o) {
    nll_sum += o.nll_sum;
    positions += o.positions;
    return *this;
  }
};

// parameter fold reused across many scoring calls while weights are frozen
struct FrozenView {
  Eigen::MatrixXd item_in;  // (|I|+1) x d input rows, last row is start
  Eigen::MatrixXd v;        // |I| x d static output rows
};

// Sequence model over item ids with attribute-aware input and output
// layers. Scoring covers real items only; the start row takes part on the
// input side and the pad row stays at zero.
class Network {
 public:
  Network() = default;
  Network(const Dataset& ds, const TrainConfig& cfg, Rng& rng);

  const TrainConfig& config() const { return cfg_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }
  CellParams& cell() { return cell_; }
  const CellParams& cell() const { return cell_; }
  const EntityCodes& codes() const { return codes_; }

  bool attrs_on_input() const {
    return cfg_.placement == Placement::Input ||
           cfg_.placement == Placement::Both;
  }
  bool attrs_on_output() const {
    return cfg_.placement == Placement::Output ||
           cfg_.placement == Placement::Both;
  }

  std::int64_t parameter_count() const {
    return store_.parameter_count() + cell_.parameter_count();
  }

  // One batch pass. train_mode draws dropout masks from rng; with_grads
  // accumulates gradients of the batch-mean loss into the tape.
  LossStat run_batch(const SequenceBatch& batch, bool train_mode,
                     bool with_grads, Rng* rng);

  // frozen full-data loss, dropout off
  LossStat dataset_loss(const std::vector<SequenceBatch>& batches);

  void zero_grads();
  double grad_norm() const;
  void adagrad_step(double lr, double grad_clip);

  // named trainable matrices; gradients() aligns with parameters() by index
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> parameters();
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> gradients() const;

  FrozenView frozen_view() const;
  // hidden state after consuming start plus the context items
  Eigen::VectorXd roll(const FrozenView& view, int user,
                       const std::vector<int>& context) const;
  Eigen::VectorXd scores_from_h(const FrozenView& view,
                                const Eigen::VectorXd& h) const;
  // nll of each target in turn, extending the context as it goes
  std::vector<double> sequential_nlls(const FrozenView& view, int user,
                                      const std::vector<int>& context,
                                      const std::vector<int>& targets) const;

 private:
  Eigen::VectorXd user_input_row(int user) const;
  // one frozen step; user_row empty when the user part is off
  void step_one(const FrozenView& view, const Eigen::MatrixXd& user_row,
                int token, Eigen::MatrixXd* h, Eigen::MatrixXd* c) const;

  TrainConfig cfg_;
  ParamStore store_;
  CellParams cell_;
  EntityCodes codes_;

  // embedding gradient tape and adagrad accumulators, indexed in the
  // parameters() order: user_emb, item_emb, user_attr, item_attr, then the
  // separate output tables when present
  std::vector<Eigen::MatrixXd> egrads_;
  std::vector<Eigen::MatrixXd> eacc_;
  CellGrads cgrads_;
  CellGrads cacc_;
  int gi_out_emb_ = -1;
  int gi_out_attr_ = -1;
};

}  // namespace harnn
