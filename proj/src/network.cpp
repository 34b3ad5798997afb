#include "harnn/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace harnn {

namespace {
constexpr double kAdaGradEps = 1e-8;
}

Network::Network(const Dataset& ds, const TrainConfig& cfg, Rng& rng)
    : cfg_(cfg) {
  store_.init(ds.num_users(), ds.num_items(), ds.user_vocab.size(),
              ds.item_vocab.size(), cfg.dim, cfg.sharing, cfg.placement, rng);
  cell_.init(cfg.cell, cfg.dim, rng);
  codes_ = build_entity_codes(ds, cfg.mode, cfg.pooling, cfg.reduction);

  auto zero_like = [](const Eigen::MatrixXd& m) {
    return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  };
  egrads_.clear();
  egrads_.push_back(zero_like(store_.user_emb));
  egrads_.push_back(zero_like(store_.item_emb));
  egrads_.push_back(zero_like(store_.user_attr));
  egrads_.push_back(zero_like(store_.item_attr));
  gi_out_emb_ = 1;
  gi_out_attr_ = 3;
  if (store_.out_item_emb.rows() > 0) {
    egrads_.push_back(zero_like(store_.out_item_emb));
    gi_out_emb_ = static_cast<int>(egrads_.size()) - 1;
  }
  if (store_.out_item_attr.rows() > 0) {
    egrads_.push_back(zero_like(store_.out_item_attr));
    gi_out_attr_ = static_cast<int>(egrads_.size()) - 1;
  }
  eacc_ = egrads_;
  cgrads_.init_like(cell_);
  cacc_.init_like(cell_);
}

Eigen::VectorXd Network::user_input_row(int user) const {
  return fold_input(store_.user_emb.row(user).transpose(), store_.user_attr,
                    codes_.users[user]);
}

LossStat Network::run_batch(const SequenceBatch& batch, bool train_mode,
                            bool with_grads, Rng* rng) {
  const int T = batch.steps();
  const int B = batch.rows();
  const int d = store_.dim;
  const int n_items = store_.num_items;
  const bool in_attrs = attrs_on_input();
  const bool out_attrs = attrs_on_output();
  const bool lstm = cell_.kind == CellKind::Lstm;
  const double p_drop = train_mode ? cfg_.dropout : 0.0;
  const bool drop = p_drop > 0.0;
  const double inv_keep = drop ? 1.0 / (1.0 - p_drop) : 1.0;

  const Eigen::MatrixXd item_in = item_input_matrix(store_, codes_, in_attrs);
  const Eigen::MatrixXd v = output_item_matrix(store_, codes_, out_attrs);

  Eigen::MatrixXd user_part;
  if (in_attrs) {
    user_part.resize(B, d);
    for (int b = 0; b < B; ++b) {
      user_part.row(b) = user_input_row(batch.users[b]).transpose();
    }
  }

  LossStat stat;
  for (int t = 0; t < T; ++t) stat.positions += batch.active[t];
  const double inv_n = 1.0 / static_cast<double>(stat.positions);

  std::vector<Eigen::MatrixXd> q(T), h(T), c, imask, dhout;
  std::vector<CellStepTrace> traces(T);
  if (lstm) c.resize(T);
  if (drop) imask.resize(T);
  if (with_grads) dhout.resize(T);

  Eigen::MatrixXd dv;
  if (with_grads) dv = Eigen::MatrixXd::Zero(n_items, d);

  for (int t = 0; t < T; ++t) {
    const int n = batch.active[t];
    q[t].resize(n, d);
    for (int b = 0; b < n; ++b) {
      q[t].row(b) = item_in.row(batch.inputs[b][t]);
      if (in_attrs) q[t].row(b) += user_part.row(b);
    }
    if (drop) {
      imask[t].resize(n, d);
      for (int r = 0; r < n; ++r) {
        for (int col = 0; col < d; ++col) {
          imask[t](r, col) = rng->bernoulli(p_drop) ? 0.0 : inv_keep;
        }
      }
      q[t] = q[t].cwiseProduct(imask[t]);
    }

    const Eigen::MatrixXd h_prev =
        t > 0 ? Eigen::MatrixXd(h[t - 1].topRows(n))
              : Eigen::MatrixXd(Eigen::MatrixXd::Zero(n, d));
    Eigen::MatrixXd c_prev;
    if (lstm) {
      c_prev = t > 0 ? Eigen::MatrixXd(c[t - 1].topRows(n))
                     : Eigen::MatrixXd(Eigen::MatrixXd::Zero(n, d));
    }
    cell_forward(cell_, q[t], h_prev, c_prev, &h[t], lstm ? &c[t] : nullptr,
                 &traces[t]);

    Eigen::MatrixXd omask;
    Eigen::MatrixXd hd = h[t];
    if (drop) {
      omask.resize(n, d);
      for (int r = 0; r < n; ++r) {
        for (int col = 0; col < d; ++col) {
          omask(r, col) = rng->bernoulli(p_drop) ? 0.0 : inv_keep;
        }
      }
      hd = hd.cwiseProduct(omask);
    }

    MaxPoolTrace mtrace;
    const Eigen::MatrixXd scores = output_scores(
        hd, v, store_, codes_, out_attrs, with_grads ? &mtrace : nullptr);

    Eigen::MatrixXd dscores;
    if (with_grads) dscores.resize(n, n_items);
    for (int b = 0; b < n; ++b) {
      const int target = batch.targets[b][t];
      const Eigen::ArrayXd row = scores.row(b).transpose().array();
      const double m = row.maxCoeff();
      const double lse = m + std::log((row - m).exp().sum());
      const double nll = lse - row(target);
      if (!std::isfinite(nll))
        throw std::runtime_error("non-finite loss at step " +
                                 std::to_string(t) + ", batch row " +
                                 std::to_string(b));
      stat.nll_sum += nll;
      if (with_grads) {
        dscores.row(b) = ((row - lse).exp() * inv_n).matrix().transpose();
        dscores(b, target) -= inv_n;
      }
    }

    if (with_grads) {
      dv.noalias() += dscores.transpose() * hd;
      Eigen::MatrixXd dhd = dscores * v;
      if (out_attrs && codes_.total_groups > 0) {
        Eigen::MatrixXd& g_oattr = egrads_[gi_out_attr_];
        const Eigen::MatrixXd& oattr = store_.out_attr();
        for (int i = 0; i < n_items; ++i) {
          const EntityCode& code = codes_.items[i];
          for (std::size_t g = 0; g < code.max_groups.size(); ++g) {
            const int flat = codes_.item_group_offset[i] + static_cast<int>(g);
            for (int b = 0; b < n; ++b) {
              const int tok =
                  mtrace.argmax[static_cast<std::size_t>(b) *
                                    codes_.total_groups + flat];
              const double w = code.max_group_coef * dscores(b, i);
              dhd.row(b) += w * oattr.row(tok);
              g_oattr.row(tok) += w * hd.row(b);
            }
          }
        }
      }
      dhout[t] = drop ? Eigen::MatrixXd(dhd.cwiseProduct(omask)) : dhd;
    }
  }

  if (!with_grads) return stat;

  Eigen::MatrixXd carry = Eigen::MatrixXd::Zero(B, d);
  Eigen::MatrixXd ccarry;
  if (lstm) ccarry = Eigen::MatrixXd::Zero(B, d);
  Eigen::MatrixXd d_item_in = Eigen::MatrixXd::Zero(n_items + 1, d);
  Eigen::MatrixXd d_user;
  if (in_attrs) d_user = Eigen::MatrixXd::Zero(B, d);

  for (int t = T - 1; t >= 0; --t) {
    const int n = batch.active[t];
    const Eigen::MatrixXd dh = dhout[t] + carry.topRows(n);
    Eigen::MatrixXd dc;
    if (lstm) dc = ccarry.topRows(n);
    const Eigen::MatrixXd h_prev =
        t > 0 ? Eigen::MatrixXd(h[t - 1].topRows(n))
              : Eigen::MatrixXd(Eigen::MatrixXd::Zero(n, d));
    Eigen::MatrixXd c_prev;
    if (lstm) {
      c_prev = t > 0 ? Eigen::MatrixXd(c[t - 1].topRows(n))
                     : Eigen::MatrixXd(Eigen::MatrixXd::Zero(n, d));
    }
    Eigen::MatrixXd dq, dh_prev;
    cell_backward(cell_, traces[t], q[t], h_prev, c_prev, dh, &dc, &dq,
                  &dh_prev, &cgrads_);
    carry.setZero();
    carry.topRows(n) = dh_prev;
    if (lstm) {
      ccarry.setZero();
      ccarry.topRows(n) = dc;
    }
    if (drop) dq = dq.cwiseProduct(imask[t]);
    for (int b = 0; b < n; ++b) {
      d_item_in.row(batch.inputs[b][t]) += dq.row(b);
      if (in_attrs) d_user.row(b) += dq.row(b);
    }
  }

  Eigen::MatrixXd& g_oemb = egrads_[gi_out_emb_];
  if (out_attrs) {
    Eigen::MatrixXd& g_oattr = egrads_[gi_out_attr_];
    for (int i = 0; i < n_items; ++i) {
      const EntityCode& code = codes_.items[i];
      g_oemb.row(i) += code.out_identity_coef * dv.row(i);
      for (const auto& tc : code.output_static) {
        g_oattr.row(tc.index) += tc.coef * dv.row(i);
      }
    }
  } else {
    g_oemb.topRows(n_items) += dv;
  }

  Eigen::MatrixXd& g_iemb = egrads_[1];
  g_iemb.row(store_.start_id()) += d_item_in.row(n_items);
  if (in_attrs) {
    Eigen::MatrixXd& g_iattr = egrads_[3];
    for (int i = 0; i < n_items; ++i) {
      g_iemb.row(i) += d_item_in.row(i);
      for (const auto& tc : codes_.items[i].input_attr) {
        g_iattr.row(tc.index) += tc.coef * d_item_in.row(i);
      }
    }
    Eigen::MatrixXd& g_uemb = egrads_[0];
    Eigen::MatrixXd& g_uattr = egrads_[2];
    for (int b = 0; b < B; ++b) {
      const int u = batch.users[b];
      g_uemb.row(u) += d_user.row(b);
      for (const auto& tc : codes_.users[u].input_attr) {
        g_uattr.row(tc.index) += tc.coef * d_user.row(b);
      }
    }
  } else {
    g_iemb.topRows(n_items) += d_item_in.topRows(n_items);
  }

  return stat;
}

LossStat Network::dataset_loss(const std::vector<SequenceBatch>& batches) {
  LossStat total;
  for (const auto& b : batches) total += run_batch(b, false, false, nullptr);
  return total;
}

void Network::zero_grads() {
  for (auto& g : egrads_) g.setZero();
  cgrads_.zero();
}

double Network::grad_norm() const {
  double sq = 0.0;
  for (const auto& g : egrads_) sq += g.squaredNorm();
  for (const auto& g : cgrads_.w_in) sq += g.squaredNorm();
  for (const auto& g : cgrads_.w_rec) sq += g.squaredNorm();
  for (const auto& g : cgrads_.b) sq += g.squaredNorm();
  return std::sqrt(sq);
}

void Network::adagrad_step(double lr, double grad_clip) {
  egrads_[1].row(store_.pad_id()).setZero();
  if (gi_out_emb_ != 1) egrads_[gi_out_emb_].row(store_.pad_id()).setZero();

  const double norm = grad_norm();
  const double scale =
      (grad_clip > 0.0 && norm > grad_clip) ? grad_clip / norm : 1.0;

  auto update = [&](Eigen::MatrixXd& p, Eigen::MatrixXd& g,
                    Eigen::MatrixXd& acc) {
    if (scale != 1.0) g *= scale;
    acc.array() += g.array().square();
    p.array() -= lr * g.array() / (acc.array() + kAdaGradEps).sqrt();
  };

  update(store_.user_emb, egrads_[0], eacc_[0]);
  update(store_.item_emb, egrads_[1], eacc_[1]);
  update(store_.user_attr, egrads_[2], eacc_[2]);
  update(store_.item_attr, egrads_[3], eacc_[3]);
  if (gi_out_emb_ != 1) {
    update(store_.out_item_emb, egrads_[gi_out_emb_], eacc_[gi_out_emb_]);
  }
  if (gi_out_attr_ != 3) {
    update(store_.out_item_attr, egrads_[gi_out_attr_], eacc_[gi_out_attr_]);
  }
  for (int g = 0; g < cell_.gate_count(); ++g) {
    update(cell_.w_in[g], cgrads_.w_in[g], cacc_.w_in[g]);
    update(cell_.w_rec[g], cgrads_.w_rec[g], cacc_.w_rec[g]);
    update(cell_.b[g], cgrads_.b[g], cacc_.b[g]);
  }
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> Network::parameters() {
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> out;
  out.emplace_back("user_emb", &store_.user_emb);
  out.emplace_back("item_emb", &store_.item_emb);
  out.emplace_back("user_attr", &store_.user_attr);
  out.emplace_back("item_attr", &store_.item_attr);
  if (store_.out_item_emb.rows() > 0) {
    out.emplace_back("out_item_emb", &store_.out_item_emb);
  }
  if (store_.out_item_attr.rows() > 0) {
    out.emplace_back("out_item_attr", &store_.out_item_attr);
  }
  for (int g = 0; g < cell_.gate_count(); ++g) {
    out.emplace_back("cell_w_in_" + std::to_string(g), &cell_.w_in[g]);
    out.emplace_back("cell_w_rec_" + std::to_string(g), &cell_.w_rec[g]);
    out.emplace_back("cell_b_" + std::to_string(g), &cell_.b[g]);
  }
  return out;
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>> Network::gradients()
    const {
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> out;
  out.emplace_back("user_emb", &egrads_[0]);
  out.emplace_back("item_emb", &egrads_[1]);
  out.emplace_back("user_attr", &egrads_[2]);
  out.emplace_back("item_attr", &egrads_[3]);
  if (gi_out_emb_ != 1) out.emplace_back("out_item_emb", &egrads_[gi_out_emb_]);
  if (gi_out_attr_ != 3) {
    out.emplace_back("out_item_attr", &egrads_[gi_out_attr_]);
  }
  for (int g = 0; g < cell_.gate_count(); ++g) {
    out.emplace_back("cell_w_in_" + std::to_string(g), &cgrads_.w_in[g]);
    out.emplace_back("cell_w_rec_" + std::to_string(g), &cgrads_.w_rec[g]);
    out.emplace_back("cell_b_" + std::to_string(g), &cgrads_.b[g]);
  }
  return out;
}

FrozenView Network::frozen_view() const {
  FrozenView view;
  view.item_in = item_input_matrix(store_, codes_, attrs_on_input());
  view.v = output_item_matrix(store_, codes_, attrs_on_output());
  return view;
}

void Network::step_one(const FrozenView& view, const Eigen::MatrixXd& user_row,
                       int token, Eigen::MatrixXd* h, Eigen::MatrixXd* c) const {
  Eigen::MatrixXd q = view.item_in.row(token);
  if (user_row.size() > 0) q += user_row;
  Eigen::MatrixXd h_new, c_new;
  cell_forward(cell_, q, *h, *c, &h_new, &c_new, nullptr);
  *h = h_new;
  if (cell_.kind == CellKind::Lstm) *c = c_new;
}

Eigen::VectorXd Network::roll(const FrozenView& view, int user,
                              const std::vector<int>& context) const {
  Eigen::MatrixXd user_row;
  if (attrs_on_input()) user_row = user_input_row(user).transpose();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, store_.dim);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, store_.dim);
  step_one(view, user_row, store_.num_items, &h, &c);
  for (int item : context) step_one(view, user_row, item, &h, &c);
  return h.row(0).transpose();
}

Eigen::VectorXd Network::scores_from_h(const FrozenView& view,
                                       const Eigen::VectorXd& h) const {
  const Eigen::MatrixXd hm = h.transpose();
  return output_scores(hm, view.v, store_, codes_, attrs_on_output(), nullptr)
      .row(0)
      .transpose();
}

std::vector<double> Network::sequential_nlls(const FrozenView& view, int user,
                                             const std::vector<int>& context,
                                             const std::vector<int>& targets)
    const {
  Eigen::MatrixXd user_row;
  if (attrs_on_input()) user_row = user_input_row(user).transpose();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, store_.dim);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, store_.dim);
  step_one(view, user_row, store_.num_items, &h, &c);
  for (int item : context) step_one(view, user_row, item, &h, &c);

  std::vector<double> nlls;
  nlls.reserve(targets.size());
  for (int target : targets) {
    const Eigen::ArrayXd row =
        scores_from_h(view, h.row(0).transpose()).array();
    const double m = row.maxCoeff();
    const double lse = m + std::log((row - m).exp().sum());
    nlls.push_back(lse - row(target));
    step_one(view, user_row, target, &h, &c);
  }
  return nlls;
}

}  // namespace harnn
