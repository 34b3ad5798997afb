#include "harnn/config.hpp"

#include <stdexcept>

#include "json.hpp"

namespace harnn {

std::string to_string(CombinationMode m) {
  return m == CombinationMode::Mix ? "mix" : "het";
}
std::string to_string(Pooling p) { return p == Pooling::Mean ? "mean" : "max"; }
std::string to_string(Reduction r) {
  return r == Reduction::Sum ? "sum" : "average";
}
std::string to_string(Placement p) {
  switch (p) {
    case Placement::None: return "none";
    case Placement::Input: return "input";
    case Placement::Output: return "output";
    case Placement::Both: return "both";
  }
  return "both";
}
std::string to_string(Sharing s) {
  return s == Sharing::Shared ? "shared" : "separate";
}
std::string to_string(CellKind c) { return c == CellKind::Gru ? "gru" : "lstm"; }
std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Pop: return "pop";
    case ModelKind::Nhmf: return "nhmf";
    case ModelKind::Harnn: return "harnn";
  }
  return "harnn";
}

CombinationMode combination_mode_from_string(const std::string& s) {
  if (s == "mix") return CombinationMode::Mix;
  if (s == "het") return CombinationMode::Het;
  throw std::invalid_argument("unknown combination mode: " + s);
}
Pooling pooling_from_string(const std::string& s) {
  if (s == "mean") return Pooling::Mean;
  if (s == "max") return Pooling::Max;
  throw std::invalid_argument("unknown pooling: " + s);
}
Reduction reduction_from_string(const std::string& s) {
  if (s == "sum") return Reduction::Sum;
  if (s == "average") return Reduction::Average;
  throw std::invalid_argument("unknown reduction: " + s);
}
Placement placement_from_string(const std::string& s) {
  if (s == "none") return Placement::None;
  if (s == "input") return Placement::Input;
  if (s == "output") return Placement::Output;
  if (s == "both") return Placement::Both;
  throw std::invalid_argument("unknown placement: " + s);
}
Sharing sharing_from_string(const std::string& s) {
  if (s == "shared") return Sharing::Shared;
  if (s == "separate") return Sharing::Separate;
  throw std::invalid_argument("unknown sharing: " + s);
}
CellKind cell_kind_from_string(const std::string& s) {
  if (s == "gru") return CellKind::Gru;
  if (s == "lstm") return CellKind::Lstm;
  throw std::invalid_argument("unknown cell kind: " + s);
}
ModelKind model_kind_from_string(const std::string& s) {
  if (s == "pop") return ModelKind::Pop;
  if (s == "nhmf") return ModelKind::Nhmf;
  if (s == "harnn") return ModelKind::Harnn;
  throw std::invalid_argument("unknown model kind: " + s);
}

std::string TrainConfig::to_json() const {
  nlohmann::json j;
  j["model"] = to_string(model);
  j["dim"] = dim;
  j["cell"] = to_string(cell);
  j["mode"] = to_string(mode);
  j["placement"] = to_string(placement);
  j["sharing"] = to_string(sharing);
  j["pooling"] = to_string(pooling);
  j["reduction"] = to_string(reduction);
  j["dropout"] = dropout;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["seed"] = seed;
  j["max_seq_len"] = max_seq_len;
  j["dev_fraction"] = dev_fraction;
  j["test_fraction"] = test_fraction;
  j["min_count"] = min_count;
  j["shuffle"] = shuffle;
  j["grad_clip"] = grad_clip;
  return j.dump(2) + "\n";
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TrainConfig c;
  if (j.contains("model")) c.model = model_kind_from_string(j["model"]);
  c.dim = j.value("dim", c.dim);
  if (j.contains("cell")) c.cell = cell_kind_from_string(j["cell"]);
  if (j.contains("mode")) c.mode = combination_mode_from_string(j["mode"]);
  if (j.contains("placement")) c.placement = placement_from_string(j["placement"]);
  if (j.contains("sharing")) c.sharing = sharing_from_string(j["sharing"]);
  if (j.contains("pooling")) c.pooling = pooling_from_string(j["pooling"]);
  if (j.contains("reduction")) c.reduction = reduction_from_string(j["reduction"]);
  c.dropout = j.value("dropout", c.dropout);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
  c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.min_count = j.value("min_count", c.min_count);
  c.shuffle = j.value("shuffle", c.shuffle);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  return c;
}

}  // namespace harnn
