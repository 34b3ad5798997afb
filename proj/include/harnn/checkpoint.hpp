#pragma once

#include <string>

#include "harnn/dataset.hpp"
#include "harnn/trainer.hpp"

namespace harnn {

// Text block identifying a training run: config, schema, entity names,
// vocabs, quantizer centers. Loading rebuilds the block from the data
// directory at hand and compares byte-for-byte, since vocab construction is
// a pure function of the input files and the config.
std::string dataset_fingerprint(const TrainConfig& cfg, const Dataset& ds);

void save_checkpoint(const std::string& path, TrainedModel& model,
                     const Dataset& ds);

// config and schema alone, to rebuild the dataset before a full load
struct CheckpointHeader {
  TrainConfig config;
  AttributeSchema schema;
};
CheckpointHeader read_checkpoint_header(const std::string& path);

// Fills a model shell with the stored matrices. Throws CheckpointError when
// the dataset does not reproduce the stored fingerprint or shapes differ.
TrainedModel load_checkpoint(const std::string& path, const Dataset& ds);

}  // namespace harnn
