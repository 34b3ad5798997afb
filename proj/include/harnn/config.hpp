#pragma once

#include <cstdint>
#include <string>

namespace harnn {

// how an entity's attribute vectors fold into one vector
enum class CombinationMode { Mix, Het };
// within a multi-hot attribute set on the output side
enum class Pooling { Mean, Max };
// across attribute types on the output side
enum class Reduction { Sum, Average };
// where attributes enter the model
enum class Placement { None, Input, Output, Both };
// output embeddings tied to input embeddings or not
enum class Sharing { Shared, Separate };
enum class CellKind { Gru, Lstm };
enum class ModelKind { Pop, Nhmf, Harnn };

std::string to_string(CombinationMode m);
std::string to_string(Pooling p);
std::string to_string(Reduction r);
std::string to_string(Placement p);
std::string to_string(Sharing s);
std::string to_string(CellKind c);
std::string to_string(ModelKind m);

CombinationMode combination_mode_from_string(const std::string& s);
Pooling pooling_from_string(const std::string& s);
Reduction reduction_from_string(const std::string& s);
Placement placement_from_string(const std::string& s);
Sharing sharing_from_string(const std::string& s);
CellKind cell_kind_from_string(const std::string& s);
ModelKind model_kind_from_string(const std::string& s);

// one line of the per-epoch training log
struct EpochRow {
  int epoch = 0;
  std::string split;  // "train" or "dev"
  double loss = 0.0;
  double perplexity = 0.0;
};

struct TrainConfig {
  ModelKind model = ModelKind::Harnn;
  int dim = 32;
  CellKind cell = CellKind::Gru;
  CombinationMode mode = CombinationMode::Het;
  Placement placement = Placement::Both;
  Sharing sharing = Sharing::Shared;
  Pooling pooling = Pooling::Mean;
  Reduction reduction = Reduction::Sum;
  double dropout = 0.5;
  double learning_rate = 0.1;
  int batch_size = 32;
  int max_epochs = 20;
  int patience = 3;
  std::uint64_t seed = 42;
  int max_seq_len = 50;
  double dev_fraction = 0.05;
  double test_fraction = 0.1;
  int min_count = 2;
  bool shuffle = true;
  double grad_clip = 5.0;

  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
};

}  // namespace harnn
