#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "harnn/cell.hpp"
#include "harnn/network.hpp"
#include "harnn/rng.hpp"
#include "harnn/sequences.hpp"
#include "reference.hpp"
#include "toys.hpp"

using namespace harnn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

SequenceBatch single_batch(const Dataset& ds, int start_id, int max_len = 5) {
  auto seqs = build_sequences(ds.interactions);
  auto batches = make_batches(seqs, static_cast<int>(seqs.size()), max_len,
                              start_id);
  REQUIRE(batches.size() == 1);
  return batches[0];
}

double frozen_mean_loss(Network& net, const SequenceBatch& b) {
  return net.run_batch(b, false, false, nullptr).mean();
}

// max relative error between analytic gradients and central differences
// over every parameter entry
double gradcheck(Network& net, const SequenceBatch& b) {
  net.zero_grads();
  net.run_batch(b, false, true, nullptr);
  auto params = net.parameters();
  auto grads = net.gradients();
  const double step = 1e-5;
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    MatrixXd& theta = *params[p].second;
    const MatrixXd& g = *grads[p].second;
    for (int r = 0; r < theta.rows(); ++r) {
      for (int c = 0; c < theta.cols(); ++c) {
        const double saved = theta(r, c);
        theta(r, c) = saved + step;
        const double up = frozen_mean_loss(net, b);
        theta(r, c) = saved - step;
        const double down = frozen_mean_loss(net, b);
        theta(r, c) = saved;
        const double fd = (up - down) / (2.0 * step);
        const double a = g(r, c);
        // the quotient carries ~1e-11 cancellation noise, so floor the
        // denominator instead of skipping small entries
        const double denom = std::max({std::abs(a), std::abs(fd), 1e-5});
        worst = std::max(worst, std::abs(a - fd) / denom);
      }
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("gate formulas at zero weights hit the analytic fixed points") {
  Rng rng(1);
  CellParams gru;
  gru.init(CellKind::Gru, 2, rng);
  for (auto& m : gru.w_in) m.setZero();
  for (auto& m : gru.w_rec) m.setZero();
  MatrixXd q(1, 2), h(1, 2), c(1, 2), h2, c2;
  q << 3, -1;
  h << 4, 2;
  c.setZero();
  cell_forward(gru, q, h, c, &h2, &c2, nullptr);
  CHECK(h2(0, 0) == doctest::Approx(2.0));  // z = r = 1/2, hbar = 0
  CHECK(h2(0, 1) == doctest::Approx(1.0));

  CellParams lstm;
  lstm.init(CellKind::Lstm, 2, rng);
  for (auto& m : lstm.w_in) m.setZero();
  for (auto& m : lstm.w_rec) m.setZero();
  c << 2, -2;
  cell_forward(lstm, q, h, c, &h2, &c2, nullptr);
  CHECK(c2(0, 0) == doctest::Approx(1.0));  // f = i = 1/2, g = 0
  CHECK(h2(0, 0) == doctest::Approx(0.5 * std::tanh(1.0)));
}

TEST_CASE("cell forward matches the straight-line gate reference") {
  Rng rng(5);
  for (int kind = 0; kind < 2; ++kind) {
    CellParams p;
    p.init(kind == 0 ? CellKind::Gru : CellKind::Lstm, 3, rng);
    MatrixXd q(1, 3), h(1, 3), c(1, 3), h2, c2;
    for (int i = 0; i < 3; ++i) {
      q(0, i) = rng.normal();
      h(0, i) = rng.normal();
      c(0, i) = rng.normal();
    }
    cell_forward(p, q, h, c, &h2, &c2, nullptr);

    VectorXd hv = h.row(0).transpose();
    VectorXd cv = c.row(0).transpose();
    refimpl::cell_step(p, q.row(0).transpose(), &hv, &cv);
    for (int i = 0; i < 3; ++i)
      CHECK(h2(0, i) == doctest::Approx(hv(i)).epsilon(1e-12));
  }
}

TEST_CASE("per-step losses match the unbatched reference") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Dataset ds = toys::random_dataset(rng, 3, 7);
    TrainConfig cfg = toys::sweep_config(trial * 3, 3 + trial % 5);
    Rng init(cfg.seed);
    Network net(ds, cfg, init);
    FrozenView view = net.frozen_view();

    auto seqs = build_sequences(ds.interactions);
    double ref_sum = 0.0;
    std::int64_t positions = 0;
    for (const auto& s : seqs) {
      auto ref = refimpl::sequence_nlls(ds, net.store(), net.cell(), cfg,
                                        s.user, s.items);
      auto got = net.sequential_nlls(view, s.user, {}, s.items);
      REQUIRE(got.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i)
        CHECK(std::abs(got[i] - ref[i]) <= 1e-12);
      for (double v : ref) ref_sum += v;
      positions += static_cast<std::int64_t>(ref.size());
    }

    // the batched pass agrees too, padding and all
    SequenceBatch b = single_batch(ds, net.store().start_id(), 50);
    LossStat stat = net.run_batch(b, false, false, nullptr);
    CHECK(stat.positions == positions);
    CHECK(std::abs(stat.nll_sum - ref_sum) <= 1e-10);
  }
}

TEST_CASE("input rows match the reference fold") {
  Rng rng(77);
  for (int trial = 0; trial < 8; ++trial) {
    Dataset ds = toys::random_dataset(rng, 3, 6);
    TrainConfig cfg = toys::sweep_config(trial * 5 + 1, 4);
    Rng init(cfg.seed);
    Network net(ds, cfg, init);
    FrozenView view = net.frozen_view();
    for (int i = 0; i <= ds.num_items(); ++i) {
      // user part is added separately inside the network, so compare the
      // item-only rows: reference with attributes-on-input semantics
      VectorXd ref;
      if (i == ds.num_items()) {
        ref = net.store().item_emb.row(net.store().start_id()).transpose();
      } else if (net.attrs_on_input()) {
        ref = refimpl::combine_entity(
            cfg, net.store().item_emb.row(i).transpose(),
            net.store().item_attr, ds.item_attrs[i]);
      } else {
        ref = net.store().item_emb.row(i).transpose();
      }
      CHECK((view.item_in.row(i).transpose() - ref).cwiseAbs().maxCoeff() <=
            1e-12);
    }
  }
}

TEST_CASE("analytic gradients match finite differences across the grid") {
  // corners spanning cell, mode, pooling, placement, sharing, reduction
  const int grid[] = {0, 5, 10, 15, 18, 23, 28, 31};
  int checked = 0;
  for (int idx : grid) {
    Rng rng(900 + idx);
    Dataset ds = toys::random_dataset(rng, 3, 8);
    TrainConfig cfg = toys::sweep_config(idx, 3 + idx % 4);
    Rng init(cfg.seed);
    Network net(ds, cfg, init);
    SequenceBatch b = single_batch(ds, net.store().start_id());
    CAPTURE(idx);
    CHECK(gradcheck(net, b) <= 1e-4);
    ++checked;
  }
  CHECK(checked == 8);
}

TEST_CASE("gradients are exactly zero for untouched user rows") {
  Rng rng(13);
  Dataset ds = toys::random_dataset(rng, 4, 6);
  TrainConfig cfg = toys::sweep_config(31, 4);  // both, het
  Rng init(cfg.seed);
  Network net(ds, cfg, init);

  // batch holding user 0 only
  auto seqs = build_sequences(ds.interactions);
  std::vector<UserSequence> one = {seqs[0]};
  auto batches = make_batches(one, 1, 5, net.store().start_id());
  net.zero_grads();
  net.run_batch(batches[0], false, true, nullptr);
  auto grads = net.gradients();
  for (const auto& [name, g] : grads) {
    if (name == "user_emb") {
      CHECK(g->row(0).cwiseAbs().maxCoeff() > 0.0);
      for (int u = 1; u < 4; ++u)
        CHECK(g->row(u).cwiseAbs().maxCoeff() == 0.0);
    }
    if (name == "item_emb")
      CHECK(g->row(net.store().pad_id()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("single-item catalog gives zero loss and zero gradients") {
  Rng rng(17);
  Dataset ds = toys::random_dataset(rng, 2, 1);
  TrainConfig cfg = toys::sweep_config(24, 3);
  Rng init(cfg.seed);
  Network net(ds, cfg, init);
  SequenceBatch b = single_batch(ds, net.store().start_id());
  net.zero_grads();
  LossStat stat = net.run_batch(b, false, true, nullptr);
  CHECK(stat.nll_sum == 0.0);
  for (const auto& [name, g] : net.gradients())
    CHECK(g->cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("softmax probabilities sum to one") {
  Rng rng(23);
  Dataset ds = toys::random_dataset(rng, 2, 9);
  TrainConfig cfg = toys::sweep_config(15, 5);
  Rng init(cfg.seed);
  Network net(ds, cfg, init);
  FrozenView view = net.frozen_view();
  VectorXd h = net.roll(view, 0, {1, 2});
  VectorXd s = net.scores_from_h(view, h);
  const double m = s.maxCoeff();
  const double lse = m + std::log((s.array() - m).exp().sum());
  CHECK(std::abs((s.array() - lse).exp().sum() - 1.0) <= 1e-9);
}

TEST_CASE("dropout zero in train mode equals the frozen pass") {
  Rng rng(29);
  Dataset ds = toys::random_dataset(rng, 3, 6);
  TrainConfig cfg = toys::sweep_config(31, 4);
  cfg.dropout = 0.0;
  Rng init(cfg.seed);
  Network net(ds, cfg, init);
  SequenceBatch b = single_batch(ds, net.store().start_id());
  Rng drop(99);
  const double train_loss = net.run_batch(b, true, false, &drop).mean();
  const double frozen = frozen_mean_loss(net, b);
  CHECK(train_loss == doctest::Approx(frozen).epsilon(1e-15));
}

TEST_CASE("dropout masks are seed deterministic") {
  Rng rng(37);
  Dataset ds = toys::random_dataset(rng, 3, 6);
  TrainConfig cfg = toys::sweep_config(9, 4);
  cfg.dropout = 0.5;
  Rng init(cfg.seed);
  Network net(ds, cfg, init);
  SequenceBatch b = single_batch(ds, net.store().start_id());
  Rng d1(5), d2(5), d3(6);
  const double l1 = net.run_batch(b, true, false, &d1).mean();
  const double l2 = net.run_batch(b, true, false, &d2).mean();
  const double l3 = net.run_batch(b, true, false, &d3).mean();
  CHECK(l1 == l2);
  CHECK(l1 != l3);  // different masks move the loss
}

TEST_CASE("adagrad first step approximates a sign step and spares pad") {
  Rng rng(41);
  Dataset ds = toys::random_dataset(rng, 3, 6);
  TrainConfig cfg = toys::sweep_config(2, 4);
  cfg.learning_rate = 0.1;
  Rng init(cfg.seed);
  Network net(ds, cfg, init);
  SequenceBatch b = single_batch(ds, net.store().start_id());

  net.zero_grads();
  net.run_batch(b, false, true, nullptr);
  auto params = net.parameters();
  auto grads = net.gradients();
  // pick a healthy gradient entry
  int pi = -1, pr = 0, pc = 0;
  for (std::size_t p = 0; p < grads.size() && pi < 0; ++p)
    for (int r = 0; r < grads[p].second->rows() && pi < 0; ++r)
      for (int c = 0; c < grads[p].second->cols() && pi < 0; ++c)
        if (std::abs((*grads[p].second)(r, c)) > 1e-3) {
          pi = static_cast<int>(p);
          pr = r;
          pc = c;
        }
  REQUIRE(pi >= 0);
  const double g = (*grads[pi].second)(pr, pc);
  const double before = (*params[pi].second)(pr, pc);
  const MatrixXd pad_before = net.store().item_emb.row(net.store().pad_id());
  net.adagrad_step(cfg.learning_rate, 1e9);
  const double after = (*params[pi].second)(pr, pc);
  CHECK(after - before ==
        doctest::Approx(-0.1 * g / std::sqrt(g * g + 1e-8)).epsilon(1e-9));
  CHECK((net.store().item_emb.row(net.store().pad_id()) - pad_before)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // zero gradients step moves nothing
  const MatrixXd snapshot = *params[pi].second;
  net.zero_grads();
  net.adagrad_step(cfg.learning_rate, 1e9);
  CHECK((*params[pi].second - snapshot).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("separate sharing reproduces the shared forward, not its gradients") {
  Rng rng(43);
  Dataset ds = toys::random_dataset(rng, 3, 7);
  TrainConfig shared_cfg = toys::sweep_config(30, 4);  // placement both
  shared_cfg.sharing = Sharing::Shared;
  TrainConfig sep_cfg = shared_cfg;
  sep_cfg.sharing = Sharing::Separate;

  Rng i1(7), i2(7);
  Network a(ds, shared_cfg, i1);
  Network b(ds, sep_cfg, i2);
  SequenceBatch batch = single_batch(ds, a.store().start_id());

  // identical initialization: the separate tables start as copies
  const double la = frozen_mean_loss(a, batch);
  const double lb = frozen_mean_loss(b, batch);
  CHECK(la == lb);

  a.zero_grads();
  b.zero_grads();
  a.run_batch(batch, false, true, nullptr);
  b.run_batch(batch, false, true, nullptr);

  // the shared accumulator collects what the separate model splits in two
  MatrixXd shared_item_attr, sep_in, sep_out;
  for (const auto& [name, g] : a.gradients())
    if (name == "item_attr") shared_item_attr = *g;
  for (const auto& [name, g] : b.gradients()) {
    if (name == "item_attr") sep_in = *g;
    if (name == "out_item_attr") sep_out = *g;
  }
  REQUIRE(sep_out.size() > 0);
  CHECK((shared_item_attr - sep_in - sep_out).cwiseAbs().maxCoeff() <= 1e-12);
  // and the split halves genuinely differ
  CHECK((sep_in - sep_out).cwiseAbs().maxCoeff() > 1e-12);
}

TEST_CASE("mutating an attribute row moves input and output together") {
  Rng rng(47);
  Dataset ds = toys::random_dataset(rng, 3, 7);
  TrainConfig cfg = toys::sweep_config(30, 4);
  cfg.sharing = Sharing::Shared;
  cfg.pooling = Pooling::Mean;  // keep every token in the static output path
  Rng init(3);
  Network net(ds, cfg, init);

  // find an attribute token actually used by item 0
  REQUIRE(!net.codes().items[0].input_attr.empty());
  const int token = net.codes().items[0].input_attr[0].index;

  FrozenView before = net.frozen_view();
  net.store().item_attr.row(token).array() += 0.25;
  FrozenView after = net.frozen_view();

  CHECK((before.item_in.row(0) - after.item_in.row(0)).cwiseAbs().maxCoeff() >
        0.0);
  CHECK((before.v.row(0) - after.v.row(0)).cwiseAbs().maxCoeff() > 0.0);
}
