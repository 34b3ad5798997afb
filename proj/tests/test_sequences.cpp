#include "doctest.h"

#include <algorithm>
#include <map>
#include <vector>

#include "harnn/rng.hpp"
#include "harnn/sequences.hpp"

using namespace harnn;

TEST_CASE("sequences sort by time with stable ties") {
  std::vector<Interaction> rows = {
      {1, 7, 5}, {0, 3, 2}, {1, 8, 5}, {0, 4, 1}, {1, 9, 1},
  };
  auto seqs = build_sequences(rows);
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0].user == 0);
  CHECK(seqs[0].items == std::vector<int>{4, 3});
  CHECK(seqs[1].user == 1);
  // ties at time 5 keep file order: 7 before 8
  CHECK(seqs[1].items == std::vector<int>{9, 7, 8});
}

TEST_CASE("time split partitions by global order") {
  std::vector<Interaction> rows;
  for (int t = 0; t < 10; ++t) rows.push_back({t % 3, t, t});
  Split sp = time_split(rows, 0.3);
  CHECK(sp.train.size() == 7);
  CHECK(sp.test.size() == 3);
  for (const auto& r : sp.train) CHECK(r.time < 7);
  for (const auto& r : sp.test) CHECK(r.time >= 7);
  // union is the original multiset
  CHECK(sp.train.size() + sp.test.size() == rows.size());
  CHECK_THROWS(time_split({}, 0.5));
}

TEST_CASE("batches round trip the sequences") {
  std::vector<UserSequence> seqs;
  seqs.push_back({0, {5, 6}, {0, 1}});
  seqs.push_back({1, {1, 2, 3, 4}, {0, 1, 2, 3}});
  seqs.push_back({2, {9}, {0}});
  const int start = 100;
  auto batches = make_batches(seqs, 8, 50, start);
  REQUIRE(batches.size() == 1);
  const SequenceBatch& b = batches[0];
  REQUIRE(b.rows() == 3);
  // longest first
  CHECK(b.users == std::vector<int>{1, 0, 2});
  CHECK(b.steps() == 4);
  CHECK(b.active == std::vector<int>{3, 2, 1, 1});
  for (int r = 0; r < b.rows(); ++r) {
    REQUIRE(b.inputs[r].size() == b.targets[r].size());
    CHECK(b.inputs[r][0] == start);
    // target n is input n+1: decoding targets reconstructs the sequence
    for (std::size_t n = 0; n + 1 < b.inputs[r].size(); ++n)
      CHECK(b.inputs[r][n + 1] == b.targets[r][n]);
  }
  CHECK(b.targets[0] == std::vector<int>{1, 2, 3, 4});
  CHECK(b.targets[1] == std::vector<int>{5, 6});
  CHECK(b.targets[2] == std::vector<int>{9});
}

TEST_CASE("batches truncate to the most recent items") {
  std::vector<UserSequence> seqs;
  seqs.push_back({0, {1, 2, 3, 4, 5}, {0, 1, 2, 3, 4}});
  auto batches = make_batches(seqs, 4, 3, 99);
  REQUIRE(batches.size() == 1);
  CHECK(batches[0].targets[0] == std::vector<int>{3, 4, 5});
  CHECK(batches[0].inputs[0] == std::vector<int>{99, 3, 4});
}

TEST_CASE("subsampling keeps frequency but breaks order") {
  std::vector<UserSequence> seqs;
  seqs.push_back({0, {1, 2, 3, 4, 5}, {0, 1, 2, 3, 4}});
  Rng rng(7);

  SUBCASE("drop 0 copies the original") {
    auto out = subsample_sequences(seqs, 3, 0.0, false, rng);
    REQUIRE(out.size() == 3);
    for (const auto& s : out) CHECK(s.items == seqs[0].items);
  }
  SUBCASE("copies 0 passes through") {
    auto out = subsample_sequences(seqs, 0, 0.9, false, rng);
    REQUIRE(out.size() == 1);
    CHECK(out[0].items == seqs[0].items);
  }
  SUBCASE("keep_original prepends the source sequence") {
    auto out = subsample_sequences(seqs, 1, 0.5, true, rng);
    REQUIRE(out.size() >= 1);
    CHECK(out[0].items == seqs[0].items);
  }
  SUBCASE("retention converges to one minus drop_prob") {
    const int copies = 10000;
    auto out = subsample_sequences(seqs, copies, 0.5, false, rng);
    std::size_t kept = 0;
    for (const auto& s : out) {
      kept += s.items.size();
      CHECK(!s.items.empty());  // empty copies discarded
      // order preserved within a copy
      CHECK(std::is_sorted(s.items.begin(), s.items.end()));
    }
    const double rate = static_cast<double>(kept) / (5.0 * copies);
    CHECK(rate > 0.48);
    CHECK(rate < 0.52);
  }
}

TEST_CASE("user subsets are seeded and nested") {
  auto all = subsample_users(50, 1.0, 9);
  REQUIRE(all.size() == 50);
  for (int i = 0; i < 50; ++i) CHECK(all[i] == i);

  auto a = subsample_users(50, 0.2, 9);
  auto b = subsample_users(50, 0.2, 9);
  CHECK(a == b);
  CHECK(a.size() == 10);

  auto wider = subsample_users(50, 0.44, 9);
  CHECK(std::includes(wider.begin(), wider.end(), a.begin(), a.end()));

  auto other = subsample_users(50, 0.2, 10);
  CHECK(a != other);
}

TEST_CASE("filtering interactions by user keeps order") {
  std::vector<Interaction> rows = {{0, 1, 0}, {1, 2, 1}, {2, 3, 2}, {0, 4, 3}};
  auto out = filter_by_users(rows, {0, 2});
  REQUIRE(out.size() == 3);
  CHECK(out[0].item == 1);
  CHECK(out[1].item == 3);
  CHECK(out[2].item == 4);
}
