#pragma once

#include <memory>
#include <string>
#include <vector>

#include "harnn/baselines.hpp"
#include "harnn/config.hpp"
#include "harnn/dataset.hpp"
#include "harnn/evaluator.hpp"
#include "harnn/network.hpp"
#include "harnn/sequences.hpp"

namespace harnn {

// Chronological carve-up: the last test_fraction of interactions is the
// test side, and the last dev_fraction of what remains is the dev side.
// A fraction <= 0 leaves that side empty.
struct SplitData {
  std::vector<Interaction> train_all;  // everything before the test cut
  std::vector<Interaction> train2;     // train_all minus dev
  std::vector<Interaction> dev;
  std::vector<Interaction> test;
  std::vector<UserSequence> train_seqs;  // built from train2
};

SplitData prepare_split(const std::vector<Interaction>& rows,
                        const TrainConfig& cfg);

struct TrainedModel {
  TrainConfig config;
  std::vector<EpochRow> log;
  int best_epoch = -1;
  std::unique_ptr<Network> harnn;
  std::unique_ptr<NhmfModel> nhmf;
  std::unique_ptr<PopModel> pop;

  // ranking adapter over the current parameters
  Ranker& ranker();
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> parameters();

 private:
  std::unique_ptr<Ranker> harnn_ranker_;
};

// Gradient-descent epochs over the given sequences with dev-perplexity
// early stopping; returns the best-dev parameter snapshot. The sequences
// argument lets callers train on an augmented variant of split.train_seqs.
TrainedModel train_harnn_on(const Dataset& ds, const TrainConfig& cfg,
                            const SplitData& split,
                            const std::vector<UserSequence>& train_seqs);

// Dispatches on cfg.model; all models fit on the train2 portion.
TrainedModel train_on(const Dataset& ds, const TrainConfig& cfg,
                      const SplitData& split);

// fresh model shell for checkpoint loading: same shapes, untrained
TrainedModel make_model_shell(const Dataset& ds, const TrainConfig& cfg);

std::string epoch_log_tsv(const std::vector<EpochRow>& log);

}  // namespace harnn
