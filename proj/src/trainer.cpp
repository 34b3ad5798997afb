#include "harnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace harnn {

SplitData prepare_split(const std::vector<Interaction>& rows,
                        const TrainConfig& cfg) {
  SplitData split;
  if (cfg.test_fraction > 0.0) {
    Split ts = time_split(rows, cfg.test_fraction);
    split.train_all = std::move(ts.train);
    split.test = std::move(ts.test);
  } else {
    split.train_all = rows;
  }
  if (cfg.dev_fraction > 0.0) {
    Split ds = time_split(split.train_all, cfg.dev_fraction);
    split.train2 = std::move(ds.train);
    split.dev = std::move(ds.test);
  } else {
    split.train2 = split.train_all;
  }
  split.train_seqs = build_sequences(split.train2);
  return split;
}

namespace {

// ranking adapter over a frozen parameter fold
class HarnnRanker : public Ranker {
 public:
  explicit HarnnRanker(const Network& net)
      : net_(net), view_(net.frozen_view()) {}

  Eigen::VectorXd rank_scores(int user, const std::vector<int>& context) override {
    return net_.scores_from_h(view_, net_.roll(view_, user, context));
  }

  std::vector<double> target_nlls(int user, const std::vector<int>& context,
                                  const std::vector<int>& targets) override {
    return net_.sequential_nlls(view_, user, context, targets);
  }

 private:
  const Network& net_;
  FrozenView view_;
};

}  // namespace

Ranker& TrainedModel::ranker() {
  if (pop) return *pop;
  if (nhmf) return *nhmf;
  harnn_ranker_ = std::make_unique<HarnnRanker>(*harnn);
  return *harnn_ranker_;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> TrainedModel::parameters() {
  if (pop) return pop->parameters();
  if (nhmf) return nhmf->parameters();
  return harnn->parameters();
}

TrainedModel train_harnn_on(const Dataset& ds, const TrainConfig& cfg,
                            const SplitData& split,
                            const std::vector<UserSequence>& train_seqs) {
  TrainedModel model;
  model.config = cfg;

  Rng rng(cfg.seed);
  model.harnn = std::make_unique<Network>(ds, cfg, rng);
  Network& net = *model.harnn;

  const auto batches = make_batches(train_seqs, cfg.batch_size, cfg.max_seq_len,
                                    net.store().start_id());
  Rng drop_rng = rng.split(1);
  Rng shuffle_rng = rng.split(2);

  const EvalData dev_data = make_eval_data(split.train2, split.dev);

  auto snapshot = [&] {
    std::vector<Eigen::MatrixXd> s;
    for (auto& [name, m] : net.parameters()) s.push_back(*m);
    return s;
  };
  std::vector<Eigen::MatrixXd> best = snapshot();
  double best_ppl = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  std::vector<int> order(batches.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.shuffle) shuffle_rng.shuffle(order);
    for (int bi : order) {
      net.zero_grads();
      net.run_batch(batches[bi], true, true, &drop_rng);
      net.adagrad_step(cfg.learning_rate, cfg.grad_clip);
    }

    const LossStat train_stat = net.dataset_loss(batches);
    model.log.push_back(
        {epoch, "train", train_stat.mean(), train_stat.perplexity()});

    if (!split.dev.empty()) {
      const FrozenView view = net.frozen_view();
      LossStat dev_stat;
      for (std::size_t i = 0; i < dev_data.users.size(); ++i) {
        const auto nlls = net.sequential_nlls(
            view, dev_data.users[i], dev_data.context[i], dev_data.targets[i]);
        for (double v : nlls) dev_stat.nll_sum += v;
        dev_stat.positions += static_cast<std::int64_t>(nlls.size());
      }
      const double dev_ppl = dev_stat.perplexity();
      model.log.push_back({epoch, "dev", dev_stat.mean(), dev_ppl});
      if (dev_ppl < best_ppl) {
        best_ppl = dev_ppl;
        best = snapshot();
        model.best_epoch = epoch;
        bad_epochs = 0;
      } else if (++bad_epochs > cfg.patience) {
        break;
      }
    }
  }

  if (!split.dev.empty()) {
    auto params = net.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) *params[k].second = best[k];
  }
  return model;
}

TrainedModel train_on(const Dataset& ds, const TrainConfig& cfg,
                      const SplitData& split) {
  switch (cfg.model) {
    case ModelKind::Pop: {
      TrainedModel model;
      model.config = cfg;
      model.pop = std::make_unique<PopModel>();
      model.pop->fit(split.train2, ds.num_items());
      return model;
    }
    case ModelKind::Nhmf: {
      TrainedModel model;
      model.config = cfg;
      model.nhmf = std::make_unique<NhmfModel>();
      Rng rng(cfg.seed);
      model.nhmf->init(ds, cfg, rng);
      model.nhmf->train(split.train2, split.dev, cfg, &model.log);
      return model;
    }
    case ModelKind::Harnn:
      return train_harnn_on(ds, cfg, split, split.train_seqs);
  }
  throw std::logic_error("unknown model kind");
}

TrainedModel make_model_shell(const Dataset& ds, const TrainConfig& cfg) {
  TrainedModel model;
  model.config = cfg;
  Rng rng(cfg.seed);
  switch (cfg.model) {
    case ModelKind::Pop:
      model.pop = std::make_unique<PopModel>();
      model.pop->fit({}, ds.num_items());
      break;
    case ModelKind::Nhmf:
      model.nhmf = std::make_unique<NhmfModel>();
      model.nhmf->init(ds, cfg, rng);
      break;
    case ModelKind::Harnn:
      model.harnn = std::make_unique<Network>(ds, cfg, rng);
      break;
  }
  return model;
}

std::string epoch_log_tsv(const std::vector<EpochRow>& log) {
  std::string out = "epoch\tsplit\tloss\tperplexity\n";
  char buf[128];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%d\t%s\t%.12g\t%.12g\n", row.epoch,
                  row.split.c_str(), row.loss, row.perplexity);
    out += buf;
  }
  return out;
}

}  // namespace harnn
