#pragma once

#include <cstdint>
#include <string>

namespace harnn {

// Topic-structured interaction generator. Items belong to latent topics
// round-robin; users start in a home topic and walk: each step keeps the
// current topic with probability `stickiness`, otherwise jumps uniformly.
// Within a topic, item popularity follows a zipf curve. Attributes reveal
// the topic: one categorical label, a few tokens from a per-topic pool, and
// a numerical value centered on the topic index.
struct SynthSpec {
  int num_users = 500;
  int num_items = 200;
  int num_topics = 5;
  int min_seq_len = 10;
  int max_seq_len = 30;
  double stickiness = 0.9;
  double zipf_exponent = 1.0;
  int multihot_pool = 8;      // tag pool size per topic
  int multihot_per_item = 3;  // tags drawn per item
  std::uint64_t seed = 1;

  std::string to_json() const;
  static SynthSpec from_json(const std::string& text);
};

struct SynthOutput {
  std::string interactions_tsv;
  std::string attrs_user_tsv;
  std::string attrs_item_tsv;
  std::string schema_json;
};

// Byte-identical output for a given spec.
SynthOutput generate_synthetic(const SynthSpec& spec);

// writes interactions.tsv, attrs_user.tsv, attrs_item.tsv, schema.json
void write_synthetic(const std::string& dir, const SynthSpec& spec);

}  // namespace harnn
