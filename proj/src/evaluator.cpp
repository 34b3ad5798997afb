#include "harnn/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "harnn/param_store.hpp"
#include "harnn/sequences.hpp"
#include "json.hpp"

namespace harnn {

namespace {

int hits_in_top_k(const std::vector<int>& ranked, const std::set<int>& relevant,
                  int k) {
  int hits = 0;
  const int limit = std::min<int>(k, static_cast<int>(ranked.size()));
  for (int r = 0; r < limit; ++r) hits += relevant.count(ranked[r]) ? 1 : 0;
  return hits;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

double precision_at_k(const std::vector<int>& ranked,
                      const std::set<int>& relevant, int k) {
  if (k <= 0) return 0.0;
  return static_cast<double>(hits_in_top_k(ranked, relevant, k)) / k;
}

double recall_at_k(const std::vector<int>& ranked, const std::set<int>& relevant,
                   int k) {
  if (relevant.empty()) return 0.0;
  return static_cast<double>(hits_in_top_k(ranked, relevant, k)) /
         static_cast<double>(relevant.size());
}

double map_at_k(const std::vector<int>& ranked, const std::set<int>& relevant,
                int k) {
  const int denom = std::min<int>(k, static_cast<int>(relevant.size()));
  if (denom == 0) return 0.0;
  double sum = 0.0;
  int hits = 0;
  const int limit = std::min<int>(k, static_cast<int>(ranked.size()));
  for (int r = 0; r < limit; ++r) {
    if (relevant.count(ranked[r])) {
      ++hits;
      sum += static_cast<double>(hits) / (r + 1);
    }
  }
  return sum / denom;
}

double ndcg_at_k(const std::vector<int>& ranked, const std::set<int>& relevant,
                 int k) {
  const int ideal = std::min<int>(k, static_cast<int>(relevant.size()));
  if (ideal == 0) return 0.0;
  double dcg = 0.0;
  const int limit = std::min<int>(k, static_cast<int>(ranked.size()));
  for (int r = 0; r < limit; ++r) {
    if (relevant.count(ranked[r])) dcg += 1.0 / std::log2(r + 2.0);
  }
  double idcg = 0.0;
  for (int r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(r + 2.0);
  return dcg / idcg;
}

EvalData make_eval_data(const std::vector<Interaction>& context_rows,
                        const std::vector<Interaction>& target_rows) {
  const auto ctx_seqs = build_sequences(context_rows);
  const auto tgt_seqs = build_sequences(target_rows);
  std::map<int, std::vector<int>> ctx;
  for (const auto& s : ctx_seqs) ctx[s.user] = s.items;

  EvalData data;
  for (const auto& s : tgt_seqs) {
    data.users.push_back(s.user);
    auto it = ctx.find(s.user);
    data.context.push_back(it == ctx.end() ? std::vector<int>{} : it->second);
    data.targets.push_back(s.items);
  }
  return data;
}

double RankingReport::perplexity() const {
  return test_positions ? std::exp(test_nll_sum / test_positions) : 0.0;
}

std::string RankingReport::to_tsv() const {
  std::string out;
  out += "users_evaluated\t" + std::to_string(evaluated_users) + "\n";
  out += "users_skipped\t" + std::to_string(skipped_users) + "\n";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    out += "precision@" + std::to_string(ks[i]) + "\t" + fmt(precision[i]) + "\n";
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    out += "recall@" + std::to_string(ks[i]) + "\t" + fmt(recall[i]) + "\n";
  }
  const std::string kk = std::to_string(ks.empty() ? 0 : ks.back());
  out += "map@" + kk + "\t" + fmt(map) + "\n";
  out += "ndcg@" + kk + "\t" + fmt(ndcg) + "\n";
  out += "perplexity\t" + fmt(perplexity()) + "\n";
  return out;
}

std::string RankingReport::to_json() const {
  nlohmann::json j;
  j["users_evaluated"] = evaluated_users;
  j["users_skipped"] = skipped_users;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    j["precision@" + std::to_string(ks[i])] = precision[i];
    j["recall@" + std::to_string(ks[i])] = recall[i];
  }
  const std::string kk = std::to_string(ks.empty() ? 0 : ks.back());
  j["map@" + kk] = map;
  j["ndcg@" + kk] = ndcg;
  j["perplexity"] = perplexity();
  return j.dump(2) + "\n";
}

RankingReport evaluate_ranker(Ranker& model, const EvalData& data,
                              bool exclude_history, const std::vector<int>& ks,
                              const std::vector<int>& restrict_users) {
  RankingReport report;
  report.ks = ks;
  report.precision.assign(ks.size(), 0.0);
  report.recall.assign(ks.size(), 0.0);
  const int max_k = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());

  for (std::size_t idx = 0; idx < data.users.size(); ++idx) {
    const int user = data.users[idx];
    if (!restrict_users.empty() &&
        !std::binary_search(restrict_users.begin(), restrict_users.end(),
                            user)) {
      continue;
    }
    const auto& context = data.context[idx];
    const auto& targets = data.targets[idx];

    std::vector<int> exclude;
    if (exclude_history) {
      exclude = context;
      std::sort(exclude.begin(), exclude.end());
      exclude.erase(std::unique(exclude.begin(), exclude.end()), exclude.end());
    }
    std::set<int> relevant(targets.begin(), targets.end());
    if (exclude_history) {
      for (int e : exclude) relevant.erase(e);
    }

    if (relevant.empty()) {
      ++report.skipped_users;
    } else {
      const Eigen::VectorXd scores = model.rank_scores(user, context);
      const std::vector<int> ranked = predict_top_k(scores, max_k, exclude);
      UserResult ur;
      ur.user = user;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        ur.precision.push_back(precision_at_k(ranked, relevant, ks[i]));
        ur.recall.push_back(recall_at_k(ranked, relevant, ks[i]));
        report.precision[i] += ur.precision.back();
        report.recall[i] += ur.recall.back();
      }
      ur.map = map_at_k(ranked, relevant, ks.back());
      ur.ndcg = ndcg_at_k(ranked, relevant, ks.back());
      report.map += ur.map;
      report.ndcg += ur.ndcg;
      report.per_user.push_back(std::move(ur));
      ++report.evaluated_users;
    }

    const std::vector<double> nlls = model.target_nlls(user, context, targets);
    for (double v : nlls) report.test_nll_sum += v;
    report.test_positions += static_cast<std::int64_t>(nlls.size());
  }

  if (report.evaluated_users > 0) {
    for (auto& v : report.precision) v /= report.evaluated_users;
    for (auto& v : report.recall) v /= report.evaluated_users;
    report.map /= report.evaluated_users;
    report.ndcg /= report.evaluated_users;
  }
  return report;
}

}  // namespace harnn
