#include "harnn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace harnn {

void PopModel::fit(const std::vector<Interaction>& train, int num_items) {
  counts_ = Eigen::MatrixXd::Zero(num_items, 1);
  for (const auto& r : train) counts_(r.item, 0) += 1.0;
}

Eigen::VectorXd PopModel::rank_scores(int, const std::vector<int>&) {
  return counts_.col(0);
}

std::vector<double> PopModel::target_nlls(int, const std::vector<int>&,
                                          const std::vector<int>& targets) {
  const double n = counts_.sum();
  const double denom = n + static_cast<double>(counts_.rows());
  std::vector<double> out;
  out.reserve(targets.size());
  for (int t : targets) {
    out.push_back(-std::log((counts_(t, 0) + 1.0) / denom));
  }
  return out;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> PopModel::parameters() {
  return {{"counts", &counts_}};
}

void NhmfModel::init(const Dataset& ds, const TrainConfig& cfg, Rng& rng) {
  store_.init(ds.num_users(), ds.num_items(), ds.user_vocab.size(),
              ds.item_vocab.size(), cfg.dim, Sharing::Shared, Placement::Both,
              rng);
  codes_ = build_entity_codes(ds, CombinationMode::Het, Pooling::Mean,
                              Reduction::Sum);
  auto zero_like = [](const Eigen::MatrixXd& m) {
    return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  };
  grads_ = {zero_like(store_.user_emb), zero_like(store_.item_emb),
            zero_like(store_.user_attr), zero_like(store_.item_attr)};
  acc_ = grads_;
}

Eigen::VectorXd NhmfModel::user_vec(int user) const {
  return fold_input(store_.user_emb.row(user).transpose(), store_.user_attr,
                    codes_.users[user]);
}

double NhmfModel::dataset_nll(const std::vector<Interaction>& rows) const {
  if (rows.empty()) return 0.0;
  const Eigen::MatrixXd v =
      item_input_matrix(store_, codes_, true).topRows(store_.num_items);
  // one softmax per distinct user
  std::map<int, std::pair<double, Eigen::ArrayXd>> cache;  // lse, scores
  double sum = 0.0;
  for (const auto& r : rows) {
    auto it = cache.find(r.user);
    if (it == cache.end()) {
      const Eigen::ArrayXd scores = (v * user_vec(r.user)).array();
      const double m = scores.maxCoeff();
      const double lse = m + std::log((scores - m).exp().sum());
      it = cache.emplace(r.user, std::make_pair(lse, scores)).first;
    }
    sum += it->second.first - it->second.second(r.item);
  }
  return sum / static_cast<double>(rows.size());
}

void NhmfModel::train(const std::vector<Interaction>& train,
                      const std::vector<Interaction>& dev,
                      const TrainConfig& cfg, std::vector<EpochRow>* log) {
  const int d = store_.dim;
  const int n_items = store_.num_items;
  const double p_drop = cfg.dropout;
  const double inv_keep = p_drop > 0.0 ? 1.0 / (1.0 - p_drop) : 1.0;

  Rng rng(cfg.seed);
  Rng drop_rng = rng.split(1);
  Rng shuffle_rng = rng.split(2);

  std::vector<std::pair<int, int>> batch_bounds;
  for (int begin = 0; begin < static_cast<int>(train.size());
       begin += cfg.batch_size) {
    batch_bounds.emplace_back(
        begin, std::min<int>(begin + cfg.batch_size,
                             static_cast<int>(train.size())));
  }

  auto snapshot = [&] {
    std::vector<Eigen::MatrixXd> s;
    for (auto& [name, m] : parameters()) s.push_back(*m);
    return s;
  };
  std::vector<Eigen::MatrixXd> best = snapshot();
  double best_ppl = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  std::vector<int> order(batch_bounds.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.shuffle) shuffle_rng.shuffle(order);
    for (int bi : order) {
      const auto [begin, end] = batch_bounds[bi];
      const int n = end - begin;
      const Eigen::MatrixXd v =
          item_input_matrix(store_, codes_, true).topRows(n_items);

      Eigen::MatrixXd u_raw(n, d), mask(n, d);
      for (int b = 0; b < n; ++b) {
        u_raw.row(b) = user_vec(train[begin + b].user).transpose();
        for (int c = 0; c < d; ++c) {
          // two dropout sites collapse into one multiplied mask
          const double m1 = drop_rng.bernoulli(p_drop) ? 0.0 : inv_keep;
          const double m2 = drop_rng.bernoulli(p_drop) ? 0.0 : inv_keep;
          mask(b, c) = m1 * m2;
        }
      }
      const Eigen::MatrixXd u = u_raw.cwiseProduct(mask);

      Eigen::MatrixXd dscores = Eigen::MatrixXd(n, n_items);
      const Eigen::MatrixXd scores = u * v.transpose();
      const double inv_n = 1.0 / static_cast<double>(n);
      for (int b = 0; b < n; ++b) {
        const Eigen::ArrayXd row = scores.row(b).transpose().array();
        const double m = row.maxCoeff();
        const double lse = m + std::log((row - m).exp().sum());
        dscores.row(b) = ((row - lse).exp() * inv_n).matrix().transpose();
        dscores(b, train[begin + b].item) -= inv_n;
      }

      for (auto& g : grads_) g.setZero();
      const Eigen::MatrixXd du = (dscores * v).cwiseProduct(mask);
      const Eigen::MatrixXd dv = dscores.transpose() * u;
      for (int b = 0; b < n; ++b) {
        const int usr = train[begin + b].user;
        grads_[0].row(usr) += du.row(b);
        for (const auto& tc : codes_.users[usr].input_attr) {
          grads_[2].row(tc.index) += tc.coef * du.row(b);
        }
      }
      for (int i = 0; i < n_items; ++i) {
        grads_[1].row(i) += dv.row(i);
        for (const auto& tc : codes_.items[i].input_attr) {
          grads_[3].row(tc.index) += tc.coef * dv.row(i);
        }
      }

      double sq = 0.0;
      for (const auto& g : grads_) sq += g.squaredNorm();
      const double norm = std::sqrt(sq);
      const double scale = (cfg.grad_clip > 0.0 && norm > cfg.grad_clip)
                               ? cfg.grad_clip / norm
                               : 1.0;
      auto params = parameters();
      for (std::size_t k = 0; k < params.size(); ++k) {
        Eigen::MatrixXd& g = grads_[k];
        if (scale != 1.0) g *= scale;
        acc_[k].array() += g.array().square();
        params[k].second->array() -=
            cfg.learning_rate * g.array() / (acc_[k].array() + 1e-8).sqrt();
      }
    }

    if (log) {
      const double train_nll = dataset_nll(train);
      log->push_back({epoch, "train", train_nll, std::exp(train_nll)});
    }
    if (!dev.empty()) {
      const double dev_nll = dataset_nll(dev);
      const double dev_ppl = std::exp(dev_nll);
      if (log) log->push_back({epoch, "dev", dev_nll, dev_ppl});
      if (dev_ppl < best_ppl) {
        best_ppl = dev_ppl;
        best = snapshot();
        bad_epochs = 0;
      } else if (++bad_epochs > cfg.patience) {
        break;
      }
    }
  }

  if (!dev.empty()) {
    auto params = parameters();
    for (std::size_t k = 0; k < params.size(); ++k) *params[k].second = best[k];
  }
}

Eigen::VectorXd NhmfModel::rank_scores(int user, const std::vector<int>&) {
  const Eigen::MatrixXd v =
      item_input_matrix(store_, codes_, true).topRows(store_.num_items);
  return v * user_vec(user);
}

std::vector<double> NhmfModel::target_nlls(int user, const std::vector<int>&,
                                           const std::vector<int>& targets) {
  const Eigen::ArrayXd scores = rank_scores(user, {}).array();
  const double m = scores.maxCoeff();
  const double lse = m + std::log((scores - m).exp().sum());
  std::vector<double> out;
  out.reserve(targets.size());
  for (int t : targets) out.push_back(lse - scores(t));
  return out;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> NhmfModel::parameters() {
  return {{"user_emb", &store_.user_emb},
          {"item_emb", &store_.item_emb},
          {"user_attr", &store_.user_attr},
          {"item_attr", &store_.item_attr}};
}

}  // namespace harnn
