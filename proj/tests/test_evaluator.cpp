#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "harnn/baselines.hpp"
#include "harnn/evaluator.hpp"
#include "reference.hpp"

using namespace harnn;

namespace {

// scores a fixed preference list, uniform likelihood over n items
struct FixedRanker : Ranker {
  Eigen::VectorXd scores;
  int n = 0;

  Eigen::VectorXd rank_scores(int, const std::vector<int>&) override {
    return scores;
  }
  std::vector<double> target_nlls(int, const std::vector<int>&,
                                  const std::vector<int>& targets) override {
    return std::vector<double>(targets.size(), std::log(double(n)));
  }
};

Interaction row(int user, int item, std::int64_t time) {
  Interaction r;
  r.user = user;
  r.item = item;
  r.time = time;
  return r;
}

}  // namespace

TEST_CASE("ranking metrics on worked examples") {
  const std::set<int> rel = {1, 9};

  // hits at ranks 1 and 3 out of two relevant items
  const std::vector<int> ranked = {1, 5, 9};
  CHECK(precision_at_k(ranked, rel, 3) == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(recall_at_k(ranked, rel, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(map_at_k(ranked, rel, 3) ==
        doctest::Approx((1.0 + 2.0 / 3) / 2).epsilon(1e-12));

  // single hit at rank 2, one relevant item
  const std::set<int> one = {7};
  const std::vector<int> miss_first = {3, 7, 4};
  CHECK(ndcg_at_k(miss_first, one, 3) ==
        doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-12));
  CHECK(map_at_k(miss_first, one, 3) == doctest::Approx(0.5).epsilon(1e-12));

  // k larger than the ranked list counts the absent tail as misses
  CHECK(precision_at_k(miss_first, one, 10) == doctest::Approx(0.1));
  CHECK(recall_at_k(miss_first, one, 10) == doctest::Approx(1.0));

  // no relevant items
  CHECK(recall_at_k(ranked, {}, 3) == 0.0);
  CHECK(map_at_k(ranked, {}, 3) == 0.0);
  CHECK(ndcg_at_k(ranked, {}, 3) == 0.0);

  // perfect ranking saturates ndcg and map
  const std::vector<int> perfect = {1, 9, 5};
  CHECK(ndcg_at_k(perfect, rel, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(map_at_k(perfect, rel, 3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("metrics agree with brute-force formulas over all relevance sets") {
  const int n = 6;
  std::vector<int> ranked(n);
  std::iota(ranked.begin(), ranked.end(), 0);
  Rng rng(71);

  for (int perm = 0; perm < 6; ++perm) {
    rng.shuffle(ranked);
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      std::set<int> rel;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) rel.insert(i);
      for (int k : {1, 2, 3, n}) {
        CAPTURE(perm);
        CAPTURE(mask);
        CAPTURE(k);
        CHECK(precision_at_k(ranked, rel, k) ==
              doctest::Approx(refimpl::precision_ref(ranked, rel, k))
                  .epsilon(1e-12));
        CHECK(recall_at_k(ranked, rel, k) ==
              doctest::Approx(refimpl::recall_ref(ranked, rel, k))
                  .epsilon(1e-12));
        CHECK(map_at_k(ranked, rel, k) ==
              doctest::Approx(refimpl::map_ref(ranked, rel, k)).epsilon(1e-12));
        CHECK(ndcg_at_k(ranked, rel, k) ==
              doctest::Approx(refimpl::ndcg_ref(ranked, rel, k)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("make_eval_data pairs each target user with its context") {
  const std::vector<Interaction> context = {row(0, 3, 10), row(0, 1, 20),
                                            row(1, 2, 5)};
  const std::vector<Interaction> targets = {row(1, 4, 30), row(2, 0, 7),
                                            row(2, 5, 9)};
  const EvalData data = make_eval_data(context, targets);

  REQUIRE(data.users.size() == 2);
  CHECK(data.users[0] == 1);
  CHECK(data.context[0] == std::vector<int>{2});
  CHECK(data.targets[0] == std::vector<int>{4});
  CHECK(data.users[1] == 2);
  CHECK(data.context[1].empty());
  CHECK(data.targets[1] == std::vector<int>{0, 5});
}

TEST_CASE("evaluate_ranker aggregation") {
  // scores rank items 3 > 2 > 1 > 0
  FixedRanker ranker;
  ranker.n = 4;
  ranker.scores = Eigen::VectorXd::LinSpaced(4, 0.0, 3.0);

  EvalData data;
  // user 0: history {3}, targets {3, 1}. with exclusion the ranking starts
  // at 2 and the only relevant item is 1, a hit at rank 2.
  data.users = {0, 1, 2};
  data.context = {{3}, {2}, {0, 1}};
  data.targets = {{3, 1}, {0}, {0, 1}};

  SUBCASE("history exclusion reshapes ranking and relevance") {
    const RankingReport rep = evaluate_ranker(ranker, data, true, {1, 2});
    // user 2's targets are all in history: skipped
    CHECK(rep.evaluated_users == 2);
    CHECK(rep.skipped_users == 1);
    // user 0 ranking {2, 1, 0}: hit at rank 2. user 1 ranking {3, 1, 0}: 0
    // lands at rank 3, outside k=2.
    CHECK(rep.precision[0] == doctest::Approx(0.0));
    CHECK(rep.precision[1] == doctest::Approx(0.25));  // (1/2 + 0)/2
    CHECK(rep.recall[1] == doctest::Approx(0.5));      // (1 + 0)/2
    CHECK(rep.map == doctest::Approx(0.25));           // (1/2 + 0)/2
    CHECK(rep.ndcg == doctest::Approx(0.5 / std::log2(3.0)));
    // likelihood still covers every target of every user, skipped or not
    CHECK(rep.test_positions == 5);
    CHECK(rep.perplexity() == doctest::Approx(4.0).epsilon(1e-12));
  }

  SUBCASE("without exclusion every target counts") {
    const RankingReport rep = evaluate_ranker(ranker, data, false, {1, 2});
    CHECK(rep.evaluated_users == 3);
    CHECK(rep.skipped_users == 0);
    // user 0 ranking {3, 2}: hit at 1. user 1: miss. user 2 ranking {3, 2}:
    // miss at k=2.
    CHECK(rep.precision[0] == doctest::Approx(1.0 / 3));
  }

  SUBCASE("restrict_users filters both metrics and likelihood") {
    const RankingReport rep = evaluate_ranker(ranker, data, true, {2}, {1});
    CHECK(rep.evaluated_users == 1);
    CHECK(rep.skipped_users == 0);
    CHECK(rep.test_positions == 1);
  }
}

TEST_CASE("uniform likelihood gives perplexity |I|") {
  // equal train counts make the smoothed item distribution exactly uniform
  std::vector<Interaction> train;
  const int n_items = 7;
  for (int i = 0; i < n_items; ++i) {
    train.push_back(row(0, i, i));
    train.push_back(row(1, i, i));
  }
  PopModel pop;
  pop.fit(train, n_items);

  EvalData data;
  data.users = {0, 1};
  data.context = {{}, {}};
  data.targets = {{0, 3, 5}, {6}};
  const RankingReport rep = evaluate_ranker(pop, data, false, {2});
  CHECK(rep.perplexity() == doctest::Approx(double(n_items)).epsilon(1e-9));
}

TEST_CASE("report serialization carries every panel") {
  FixedRanker ranker;
  ranker.n = 3;
  ranker.scores = Eigen::VectorXd::LinSpaced(3, 0.0, 2.0);
  EvalData data;
  data.users = {0};
  data.context = {{}};
  data.targets = {{2}};

  const RankingReport rep = evaluate_ranker(ranker, data, false, {1, 2});
  const std::string tsv = rep.to_tsv();
  CHECK(tsv.find("users_evaluated\t1") != std::string::npos);
  CHECK(tsv.find("precision@1\t1") != std::string::npos);
  CHECK(tsv.find("recall@2\t1") != std::string::npos);
  CHECK(tsv.find("map@2\t1") != std::string::npos);
  CHECK(tsv.find("ndcg@2\t1") != std::string::npos);
  CHECK(tsv.find("perplexity\t3") != std::string::npos);

  const std::string js = rep.to_json();
  CHECK(js.find("\"precision@1\"") != std::string::npos);
  CHECK(js.find("\"perplexity\"") != std::string::npos);
}
