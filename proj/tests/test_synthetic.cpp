#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "harnn/dataset.hpp"
#include "harnn/schema.hpp"
#include "harnn/synthetic.hpp"
#include "harnn/tsv.hpp"

using namespace harnn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("harnn_synth_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// user -> set of topics visited, with topic = item index mod num_topics
std::map<std::string, std::set<int>> visited_topics(const std::string& tsv,
                                                    int num_topics) {
  std::map<std::string, std::set<int>> out;
  for (const auto& line : lines_of(tsv)) {
    const auto fields = split_tabs(line);
    REQUIRE(fields.size() == 3);
    const int item = std::stoi(fields[1].substr(1));
    out[fields[0]].insert(item % num_topics);
  }
  return out;
}

}  // namespace

TEST_CASE("generator output is byte-identical for a spec") {
  SynthSpec spec;
  spec.num_users = 12;
  spec.num_items = 20;
  spec.num_topics = 4;
  spec.min_seq_len = 3;
  spec.max_seq_len = 6;
  spec.seed = 77;

  const SynthOutput a = generate_synthetic(spec);
  const SynthOutput b = generate_synthetic(spec);
  CHECK(a.interactions_tsv == b.interactions_tsv);
  CHECK(a.attrs_item_tsv == b.attrs_item_tsv);
  CHECK(a.attrs_user_tsv == b.attrs_user_tsv);
  CHECK(a.schema_json == b.schema_json);

  spec.seed = 78;
  const SynthOutput c = generate_synthetic(spec);
  CHECK(a.interactions_tsv != c.interactions_tsv);
}

TEST_CASE("spec round-trips through json") {
  SynthSpec spec;
  spec.num_users = 9;
  spec.stickiness = 0.65;
  spec.zipf_exponent = 1.5;
  spec.seed = 1234;
  const SynthSpec back = SynthSpec::from_json(spec.to_json());
  CHECK(back.num_users == 9);
  CHECK(back.stickiness == doctest::Approx(0.65));
  CHECK(back.zipf_exponent == doctest::Approx(1.5));
  CHECK(back.seed == 1234);
  CHECK(back.num_items == spec.num_items);
}

TEST_CASE("written dataset loads and matches its generator parameters") {
  SynthSpec spec;
  spec.num_users = 15;
  spec.num_items = 24;
  spec.num_topics = 3;
  spec.min_seq_len = 4;
  spec.max_seq_len = 7;
  spec.multihot_pool = 5;
  spec.multihot_per_item = 2;
  spec.seed = 5;

  const fs::path dir = fresh_dir("roundtrip");
  write_synthetic(dir.string(), spec);

  const AttributeSchema schema =
      AttributeSchema::from_json(read_file((dir / "schema.json").string()));
  REQUIRE(schema.types.size() == 4);

  // the catalog after ingest is the set of items that actually appear
  std::set<std::string> seen;
  for (const std::string& line :
       lines_of(read_file((dir / "interactions.tsv").string()))) {
    const auto fields = split_tabs(line);
    REQUIRE(fields.size() == 3);
    seen.insert(fields[1]);
  }

  std::vector<std::string> warnings;
  const Dataset ds = load_dataset(dir.string(), schema, 1, &warnings);
  CHECK(warnings.empty() == (seen.size() == 24));
  CHECK(ds.num_users() == 15);
  CHECK(ds.num_items() == static_cast<int>(seen.size()));

  // every user produced a walk within the configured length band
  std::map<int, int> per_user;
  for (const auto& r : ds.interactions) per_user[r.user]++;
  REQUIRE(per_user.size() == 15);
  for (const auto& [u, n] : per_user) {
    CHECK(n >= spec.min_seq_len);
    CHECK(n <= spec.max_seq_len);
  }

  // item attrs: one genre token, two tags, one quantized weight per item
  const int genre_slot = 0;
  for (int i = 0; i < ds.num_items(); ++i) {
    CHECK(ds.item_attrs[i][genre_slot].size() == 1);
  }

  // genre names partition items round-robin by topic
  const auto& items = ds.item_names;
  REQUIRE(items.size() == seen.size());
  CHECK(items[0] != items[1]);
}

TEST_CASE("perfect stickiness locks each walk to its home topic") {
  SynthSpec spec;
  spec.num_users = 10;
  spec.num_items = 30;
  spec.num_topics = 5;
  spec.min_seq_len = 8;
  spec.max_seq_len = 10;
  spec.stickiness = 1.0;
  spec.seed = 31;

  const SynthOutput out = generate_synthetic(spec);
  const auto topics_per_user =
      visited_topics(out.interactions_tsv, spec.num_topics);
  REQUIRE(topics_per_user.size() == 10);
  for (const auto& [user, topics] : topics_per_user) {
    CAPTURE(user);
    CHECK(topics.size() == 1);
  }
}

TEST_CASE("low stickiness lets walks wander") {
  SynthSpec spec;
  spec.num_users = 8;
  spec.num_items = 30;
  spec.num_topics = 5;
  spec.min_seq_len = 20;
  spec.max_seq_len = 25;
  spec.stickiness = 0.0;
  spec.seed = 32;

  const SynthOutput out = generate_synthetic(spec);
  const auto topics_per_user =
      visited_topics(out.interactions_tsv, spec.num_topics);
  int wandering = 0;
  for (const auto& [user, topics] : topics_per_user) {
    if (topics.size() > 1) ++wandering;
  }
  CHECK(wandering == 8);
}

TEST_CASE("generator rejects impossible specs") {
  SynthSpec spec;
  spec.num_topics = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);

  SynthSpec bad_len;
  bad_len.min_seq_len = 9;
  bad_len.max_seq_len = 3;
  CHECK_THROWS_AS(generate_synthetic(bad_len), std::invalid_argument);

  SynthSpec bad_tags;
  bad_tags.multihot_per_item = 20;
  bad_tags.multihot_pool = 4;
  CHECK_THROWS_AS(generate_synthetic(bad_tags), std::invalid_argument);
}
