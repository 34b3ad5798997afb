#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "harnn/evaluator.hpp"
#include "harnn/trainer.hpp"
#include "toys.hpp"

using namespace harnn;

namespace {

std::vector<Interaction> ramp_rows(int n) {
  std::vector<Interaction> rows;
  for (int i = 0; i < n; ++i) {
    Interaction r;
    r.user = i % 3;
    r.item = i % 4;
    r.time = 10 * (i + 1);
    rows.push_back(r);
  }
  return rows;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.batch_size = 8;
  cfg.max_epochs = 3;
  cfg.patience = 5;
  cfg.dev_fraction = 0.2;
  cfg.test_fraction = 0.2;
  cfg.dropout = 0.2;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("prepare_split carves test then dev off the time-ordered tail") {
  TrainConfig cfg;
  cfg.test_fraction = 0.3;
  cfg.dev_fraction = 0.25;
  const auto rows = ramp_rows(20);
  const SplitData split = prepare_split(rows, cfg);

  CHECK(split.test.size() == 6);
  CHECK(split.train_all.size() == 14);
  // dev takes a quarter of what remains after the test cut
  CHECK(split.dev.size() == 4);
  CHECK(split.train2.size() == 10);

  auto max_time = [](const std::vector<Interaction>& v) {
    std::int64_t m = std::numeric_limits<std::int64_t>::min();
    for (const auto& r : v) m = std::max(m, r.time);
    return m;
  };
  auto min_time = [](const std::vector<Interaction>& v) {
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (const auto& r : v) m = std::min(m, r.time);
    return m;
  };
  CHECK(max_time(split.train_all) <= min_time(split.test));
  CHECK(max_time(split.train2) <= min_time(split.dev));

  // sequences come from the innermost train side
  std::size_t seq_items = 0;
  for (const auto& s : split.train_seqs) seq_items += s.items.size();
  CHECK(seq_items == split.train2.size());
}

TEST_CASE("zero fractions leave dev and test empty") {
  TrainConfig cfg;
  cfg.test_fraction = 0.0;
  cfg.dev_fraction = 0.0;
  const auto rows = ramp_rows(9);
  const SplitData split = prepare_split(rows, cfg);
  CHECK(split.test.empty());
  CHECK(split.dev.empty());
  CHECK(split.train_all.size() == rows.size());
  CHECK(split.train2.size() == rows.size());
}

TEST_CASE("epoch log renders as a fixed-width tsv table") {
  std::vector<EpochRow> log;
  log.push_back({2, "dev", 0.25, 1.25});
  log.push_back({10, "train", 0.5, 1.00000000004});
  CHECK(epoch_log_tsv(log) ==
        "epoch\tsplit\tloss\tperplexity\n"
        "2\tdev\t0.25\t1.25\n"
        "10\ttrain\t0.5\t1.00000000004\n");
}

TEST_CASE("training runs are reproducible from the seed") {
  Rng rng(404);
  const Dataset ds = toys::random_dataset(rng, 8, 10);
  const TrainConfig cfg = tiny_config();
  const SplitData split = prepare_split(ds.interactions, cfg);

  TrainedModel a = train_harnn_on(ds, cfg, split, split.train_seqs);
  TrainedModel b = train_harnn_on(ds, cfg, split, split.train_seqs);
  REQUIRE(!a.log.empty());
  CHECK(epoch_log_tsv(a.log) == epoch_log_tsv(b.log));
  CHECK(a.best_epoch == b.best_epoch);

  // log layout: every epoch contributes a train row, then a dev row
  CHECK(a.log[0].epoch == 1);
  CHECK(a.log[0].split == "train");
  CHECK(a.log[1].split == "dev");
  for (const auto& row : a.log) {
    CHECK(std::isfinite(row.loss));
    CHECK(row.perplexity >= 1.0);
  }
}

TEST_CASE("kept parameters reproduce the best dev perplexity in the log") {
  Rng rng(405);
  const Dataset ds = toys::random_dataset(rng, 8, 10);
  TrainConfig cfg = tiny_config();
  cfg.max_epochs = 6;
  const SplitData split = prepare_split(ds.interactions, cfg);
  REQUIRE(!split.dev.empty());

  TrainedModel model = train_harnn_on(ds, cfg, split, split.train_seqs);

  double best = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  for (const auto& row : model.log) {
    if (row.split == "dev" && row.perplexity < best) {
      best = row.perplexity;
      best_epoch = row.epoch;
    }
  }
  CHECK(model.best_epoch == best_epoch);

  const EvalData dev_data = make_eval_data(split.train2, split.dev);
  Ranker& ranker = model.ranker();
  double nll_sum = 0.0;
  std::int64_t positions = 0;
  for (std::size_t i = 0; i < dev_data.users.size(); ++i) {
    const auto nlls = ranker.target_nlls(dev_data.users[i], dev_data.context[i],
                                         dev_data.targets[i]);
    for (double v : nlls) nll_sum += v;
    positions += static_cast<std::int64_t>(nlls.size());
  }
  CHECK(std::exp(nll_sum / positions) == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("impatience stops training early") {
  Rng rng(406);
  const Dataset ds = toys::random_dataset(rng, 6, 8);
  TrainConfig cfg = tiny_config();
  cfg.max_epochs = 50;
  cfg.patience = 0;
  cfg.learning_rate = 0.0;  // parameters never move, so dev never improves
  const SplitData split = prepare_split(ds.interactions, cfg);
  REQUIRE(!split.dev.empty());

  TrainedModel model = train_harnn_on(ds, cfg, split, split.train_seqs);
  // epoch 1 sets the incumbent, epoch 2 fails to beat it
  int last_epoch = 0;
  for (const auto& row : model.log) last_epoch = std::max(last_epoch, row.epoch);
  CHECK(last_epoch == 2);
  CHECK(model.best_epoch == 1);
}

TEST_CASE("loss falls on data the model can memorize") {
  Rng rng(407);
  const Dataset ds = toys::random_dataset(rng, 6, 10);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.batch_size = 8;
  cfg.max_epochs = 30;
  cfg.dropout = 0.0;
  cfg.learning_rate = 0.3;
  cfg.dev_fraction = 0.0;
  cfg.test_fraction = 0.0;
  cfg.seed = 7;
  const SplitData split = prepare_split(ds.interactions, cfg);

  TrainedModel model = train_harnn_on(ds, cfg, split, split.train_seqs);
  REQUIRE(model.log.size() == 30);
  CHECK(model.log.back().loss < 0.5 * model.log.front().loss);
}

TEST_CASE("train_on dispatches on the configured model kind") {
  Rng rng(408);
  const Dataset ds = toys::random_dataset(rng, 8, 10);
  TrainConfig cfg = tiny_config();
  const SplitData split = prepare_split(ds.interactions, cfg);

  SUBCASE("most-popular baseline") {
    cfg.model = ModelKind::Pop;
    TrainedModel model = train_on(ds, cfg, split);
    REQUIRE(model.pop != nullptr);
    const Eigen::VectorXd s = model.ranker().rank_scores(0, {});
    CHECK(s.size() == ds.num_items());
  }

  SUBCASE("factorization baseline logs its epochs") {
    cfg.model = ModelKind::Nhmf;
    cfg.max_epochs = 2;
    TrainedModel model = train_on(ds, cfg, split);
    REQUIRE(model.nhmf != nullptr);
    CHECK(!model.log.empty());
    CHECK(model.log[0].epoch == 1);
    const Eigen::VectorXd s = model.ranker().rank_scores(0, {});
    CHECK(s.size() == ds.num_items());
  }

  SUBCASE("recurrent model") {
    cfg.model = ModelKind::Harnn;
    TrainedModel model = train_on(ds, cfg, split);
    REQUIRE(model.harnn != nullptr);
    CHECK(!model.log.empty());
  }
}
