#include "harnn/param_store.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace harnn {

namespace {

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double scale) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rng.uniform(-scale, scale);
    }
  }
}

}  // namespace

void ParamStore::init(int num_users, int items, int user_vocab_size,
                      int item_vocab_size, int d, Sharing sharing,
                      Placement placement, Rng& rng) {
  dim = d;
  num_items = items;
  constexpr double kScale = 0.05;
  user_emb.resize(num_users, d);
  item_emb.resize(items + 2, d);
  user_attr.resize(user_vocab_size, d);
  item_attr.resize(item_vocab_size, d);
  fill_uniform(user_emb, rng, kScale);
  fill_uniform(item_emb, rng, kScale);
  fill_uniform(user_attr, rng, kScale);
  fill_uniform(item_attr, rng, kScale);
  item_emb.row(pad_id()).setZero();

  out_item_emb.resize(0, 0);
  out_item_attr.resize(0, 0);
  if (sharing == Sharing::Separate) {
    out_item_emb = item_emb;
    if (placement == Placement::Output || placement == Placement::Both) {
      out_item_attr = item_attr;
    }
  }
}

std::int64_t ParamStore::parameter_count() const {
  return static_cast<std::int64_t>(user_emb.size()) + item_emb.size() +
         user_attr.size() + item_attr.size() + out_item_emb.size() +
         out_item_attr.size();
}

namespace {

void add_coefs(const std::vector<int>& sorted_tokens, double scale, bool mean,
               std::vector<TokenCoef>* out) {
  const double total = static_cast<double>(sorted_tokens.size());
  std::size_t i = 0;
  while (i < sorted_tokens.size()) {
    std::size_t j = i;
    while (j < sorted_tokens.size() && sorted_tokens[j] == sorted_tokens[i]) ++j;
    const double count = static_cast<double>(j - i);
    out->push_back({sorted_tokens[i], (mean ? count / total : count) * scale});
    i = j;
  }
}

std::vector<int> unique_tokens(const std::vector<int>& sorted_tokens) {
  std::vector<int> u(sorted_tokens);
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

}  // namespace

EntityCodes build_entity_codes(const Dataset& ds, CombinationMode mode,
                               Pooling pooling, Reduction reduction) {
  const bool het = mode == CombinationMode::Het;
  EntityCodes codes;

  codes.users.resize(ds.num_users());
  for (int u = 0; u < ds.num_users(); ++u) {
    for (const auto& list : ds.user_attrs[u]) {
      add_coefs(list, 1.0, het, &codes.users[u].input_attr);
    }
  }

  const std::vector<int> item_slots = ds.schema.type_slots(EntitySide::Item);
  const double ident =
      reduction == Reduction::Average
          ? 1.0 / (1.0 + static_cast<double>(item_slots.size()))
          : 1.0;
  codes.items.resize(ds.num_items());
  codes.item_group_offset.assign(ds.num_items() + 1, 0);
  for (int i = 0; i < ds.num_items(); ++i) {
    EntityCode& code = codes.items[i];
    code.out_identity_coef = ident;
    code.max_group_coef = ident;
    for (int k = 0; k < static_cast<int>(item_slots.size()); ++k) {
      const auto& list = ds.item_attrs[i][k];
      add_coefs(list, 1.0, het, &code.input_attr);
      const bool pooled = het && pooling == Pooling::Max &&
                          ds.schema.types[item_slots[k]].kind ==
                              AttributeKind::MultiHot;
      if (pooled) {
        code.max_groups.push_back(unique_tokens(list));
      } else {
        add_coefs(list, ident, het, &code.output_static);
      }
    }
    codes.item_group_offset[i + 1] =
        codes.item_group_offset[i] + static_cast<int>(code.max_groups.size());
  }
  codes.total_groups = codes.item_group_offset[ds.num_items()];
  return codes;
}

Eigen::VectorXd combine_mix(const Eigen::VectorXd& identity,
                            const Eigen::MatrixXd& attr_table,
                            const std::vector<std::vector<int>>& tokens_by_type) {
  Eigen::VectorXd q = identity;
  for (const auto& list : tokens_by_type) {
    for (int tok : list) q += attr_table.row(tok).transpose();
  }
  return q;
}

Eigen::VectorXd combine_het(const Eigen::VectorXd& identity,
                            const Eigen::MatrixXd& attr_table,
                            const std::vector<std::vector<int>>& tokens_by_type) {
  Eigen::VectorXd q = identity;
  for (const auto& list : tokens_by_type) {
    if (list.empty()) continue;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(identity.size());
    for (int tok : list) mean += attr_table.row(tok).transpose();
    q += mean / static_cast<double>(list.size());
  }
  return q;
}

Eigen::VectorXd fold_input(const Eigen::VectorXd& identity,
                           const Eigen::MatrixXd& attr_table,
                           const EntityCode& code) {
  Eigen::VectorXd q = identity;
  for (const auto& tc : code.input_attr) {
    q += tc.coef * attr_table.row(tc.index).transpose();
  }
  return q;
}

Eigen::MatrixXd item_input_matrix(const ParamStore& store,
                                  const EntityCodes& codes,
                                  bool attrs_on_input) {
  const int n = store.num_items;
  Eigen::MatrixXd m(n + 1, store.dim);
  for (int i = 0; i < n; ++i) {
    if (attrs_on_input) {
      m.row(i) = fold_input(store.item_emb.row(i).transpose(), store.item_attr,
                            codes.items[i])
                     .transpose();
    } else {
      m.row(i) = store.item_emb.row(i);
    }
  }
  m.row(n) = store.item_emb.row(store.start_id());
  return m;
}

Eigen::MatrixXd output_item_matrix(const ParamStore& store,
                                   const EntityCodes& codes,
                                   bool attrs_on_output) {
  const int n = store.num_items;
  const Eigen::MatrixXd& emb = store.out_emb();
  if (!attrs_on_output) return emb.topRows(n);
  const Eigen::MatrixXd& attr = store.out_attr();
  Eigen::MatrixXd v(n, store.dim);
  for (int i = 0; i < n; ++i) {
    const EntityCode& code = codes.items[i];
    v.row(i) = code.out_identity_coef * emb.row(i);
    for (const auto& tc : code.output_static) {
      v.row(i) += tc.coef * attr.row(tc.index);
    }
  }
  return v;
}

Eigen::MatrixXd output_scores(const Eigen::MatrixXd& h_rows,
                              const Eigen::MatrixXd& v,
                              const ParamStore& store, const EntityCodes& codes,
                              bool attrs_on_output, MaxPoolTrace* trace) {
  Eigen::MatrixXd scores = h_rows * v.transpose();
  if (!attrs_on_output || codes.total_groups == 0) {
    if (trace) trace->argmax.clear();
    return scores;
  }
  const int n_rows = static_cast<int>(h_rows.rows());
  const Eigen::MatrixXd token_scores = h_rows * store.out_attr().transpose();
  if (trace) trace->argmax.assign(static_cast<std::size_t>(n_rows) *
                                      codes.total_groups, -1);
  for (int i = 0; i < store.num_items; ++i) {
    const EntityCode& code = codes.items[i];
    for (std::size_t g = 0; g < code.max_groups.size(); ++g) {
      const auto& group = code.max_groups[g];
      const int flat = codes.item_group_offset[i] + static_cast<int>(g);
      for (int b = 0; b < n_rows; ++b) {
        int best = group[0];
        double best_s = token_scores(b, group[0]);
        for (std::size_t t = 1; t < group.size(); ++t) {
          const double s = token_scores(b, group[t]);
          if (s > best_s) {
            best_s = s;
            best = group[t];
          }
        }
        scores(b, i) += code.max_group_coef * best_s;
        if (trace) {
          trace->argmax[static_cast<std::size_t>(b) * codes.total_groups + flat] =
              best;
        }
      }
    }
  }
  return scores;
}

std::vector<int> predict_top_k(const Eigen::VectorXd& scores, int k,
                               const std::vector<int>& exclude) {
  std::vector<char> banned(scores.size(), 0);
  for (int e : exclude) {
    if (e >= 0 && e < scores.size()) banned[e] = 1;
  }
  std::vector<int> ids;
  ids.reserve(scores.size());
  for (int i = 0; i < scores.size(); ++i) {
    if (!banned[i]) ids.push_back(i);
  }
  const int take = std::min<int>(k, static_cast<int>(ids.size()));
  std::partial_sort(ids.begin(), ids.begin() + take, ids.end(),
                    [&](int a, int b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  ids.resize(take);
  return ids;
}

std::vector<std::pair<int, double>> nearest_neighbors(
    const Eigen::MatrixXd& item_matrix, int item, int k) {
  const Eigen::VectorXd q = item_matrix.row(item).transpose();
  const double qn = q.norm();
  std::vector<std::pair<int, double>> sims;
  for (int i = 0; i < item_matrix.rows(); ++i) {
    if (i == item) continue;
    const double n = item_matrix.row(i).norm();
    const double sim =
        (qn > 0.0 && n > 0.0) ? item_matrix.row(i).dot(q) / (n * qn) : 0.0;
    sims.emplace_back(i, sim);
  }
  const int take = std::min<int>(k, static_cast<int>(sims.size()));
  std::partial_sort(sims.begin(), sims.begin() + take, sims.end(),
                    [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                    });
  sims.resize(take);
  return sims;
}

}  // namespace harnn
