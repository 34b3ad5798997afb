#include "harnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "harnn/rng.hpp"
#include "harnn/schema.hpp"
#include "harnn/tsv.hpp"

namespace harnn {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return std::string(buf);
}

}  // namespace

std::string SynthSpec::to_json() const {
  nlohmann::json j;
  j["num_users"] = num_users;
  j["num_items"] = num_items;
  j["num_topics"] = num_topics;
  j["min_seq_len"] = min_seq_len;
  j["max_seq_len"] = max_seq_len;
  j["stickiness"] = stickiness;
  j["zipf_exponent"] = zipf_exponent;
  j["multihot_pool"] = multihot_pool;
  j["multihot_per_item"] = multihot_per_item;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

SynthSpec SynthSpec::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SynthSpec s;
  s.num_users = j.value("num_users", s.num_users);
  s.num_items = j.value("num_items", s.num_items);
  s.num_topics = j.value("num_topics", s.num_topics);
  s.min_seq_len = j.value("min_seq_len", s.min_seq_len);
  s.max_seq_len = j.value("max_seq_len", s.max_seq_len);
  s.stickiness = j.value("stickiness", s.stickiness);
  s.zipf_exponent = j.value("zipf_exponent", s.zipf_exponent);
  s.multihot_pool = j.value("multihot_pool", s.multihot_pool);
  s.multihot_per_item = j.value("multihot_per_item", s.multihot_per_item);
  s.seed = j.value("seed", s.seed);
  return s;
}

SynthOutput generate_synthetic(const SynthSpec& spec) {
  if (spec.num_users < 1 || spec.num_items < 1 || spec.num_topics < 1)
    throw std::invalid_argument("synthetic spec needs positive counts");
  if (spec.num_topics > spec.num_items)
    throw std::invalid_argument("more topics than items");
  if (spec.min_seq_len < 1 || spec.max_seq_len < spec.min_seq_len)
    throw std::invalid_argument("bad sequence length range");
  if (spec.multihot_per_item > spec.multihot_pool)
    throw std::invalid_argument("multihot_per_item exceeds pool");

  Rng rng(spec.seed);
  const int T = spec.num_topics;

  // Topic membership round-robin so every topic is populated.
  std::vector<std::vector<int>> topic_items(T);
  for (int i = 0; i < spec.num_items; ++i) topic_items[i % T].push_back(i);

  // Popularity within a topic decays by list position.
  std::vector<std::vector<double>> topic_weights(T);
  for (int t = 0; t < T; ++t) {
    auto& w = topic_weights[t];
    w.resize(topic_items[t].size());
    for (std::size_t j = 0; j < w.size(); ++j)
      w[j] = 1.0 / std::pow(double(j + 1), spec.zipf_exponent);
  }

  std::string attrs_item;
  for (int i = 0; i < spec.num_items; ++i) {
    const int topic = i % T;
    const std::string name = "i" + std::to_string(i);
    attrs_item += name + "\tgenre\tt" + std::to_string(topic) + "\n";

    std::vector<int> pool(spec.multihot_pool);
    for (int j = 0; j < spec.multihot_pool; ++j) pool[j] = j;
    rng.shuffle(pool);
    std::vector<int> picked(pool.begin(), pool.begin() + spec.multihot_per_item);
    std::sort(picked.begin(), picked.end());
    for (int tag : picked)
      attrs_item += name + "\ttags\tm" + std::to_string(topic) + "_" +
                    std::to_string(tag) + "\n";

    const double weight = rng.normal(10.0 * topic, 1.0);
    attrs_item += name + "\tweight\t" + fmt_double(weight) + "\n";
  }

  std::string attrs_user;
  std::string interactions;
  for (int u = 0; u < spec.num_users; ++u) {
    const int home = u % T;
    const std::string name = "u" + std::to_string(u);
    attrs_user += name + "\tgroup\tg" + std::to_string(home) + "\n";

    const int len =
        spec.min_seq_len + rng.uniform_int(spec.max_seq_len - spec.min_seq_len + 1);
    std::vector<int> items(len);
    int topic = home;
    for (int k = 0; k < len; ++k) {
      const int pos = rng.weighted_index(topic_weights[topic]);
      items[k] = topic_items[topic][pos];
      if (rng.bernoulli(1.0 - spec.stickiness)) topic = rng.uniform_int(T);
    }
    std::vector<long long> times(len);
    for (int k = 0; k < len; ++k) times[k] = rng.uniform_int(1000000);
    std::sort(times.begin(), times.end());
    for (int k = 0; k < len; ++k)
      interactions += name + "\ti" + std::to_string(items[k]) + "\t" +
                      std::to_string(times[k]) + "\n";
  }

  AttributeSchema schema;
  schema.types.push_back({"genre", AttributeKind::Categorical, EntitySide::Item, 32});
  schema.types.push_back({"tags", AttributeKind::MultiHot, EntitySide::Item, 32});
  schema.types.push_back({"weight", AttributeKind::Numerical, EntitySide::Item, 8});
  schema.types.push_back({"group", AttributeKind::Categorical, EntitySide::User, 32});

  SynthOutput out;
  out.interactions_tsv = std::move(interactions);
  out.attrs_user_tsv = std::move(attrs_user);
  out.attrs_item_tsv = std::move(attrs_item);
  out.schema_json = schema.to_json();
  return out;
}

void write_synthetic(const std::string& dir, const SynthSpec& spec) {
  SynthOutput out = generate_synthetic(spec);
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_file((base / "interactions.tsv").string(), out.interactions_tsv);
  write_file((base / "attrs_user.tsv").string(), out.attrs_user_tsv);
  write_file((base / "attrs_item.tsv").string(), out.attrs_item_tsv);
  write_file((base / "schema.json").string(), out.schema_json);
}

}  // namespace harnn
