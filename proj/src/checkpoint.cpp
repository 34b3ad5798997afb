#include "harnn/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <map>

#include "harnn/tsv.hpp"
#include "harnn/version.hpp"

namespace harnn {

namespace {

constexpr char kMagic[8] = {'H', 'A', 'R', 'N', 'N', 'C', 'K', 'P'};

void append_u32(std::string* out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out->append(buf, 4);
}

void append_u64(std::string* out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out->append(buf, 8);
}

struct Reader {
  const std::string& data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw CheckpointError("checkpoint truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, data.data() + pos, 4);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, data.data() + pos, 8);
    pos += 8;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data.substr(pos, n);
    pos += n;
    return s;
  }
};

std::string extract_section(const std::string& blob, const std::string& name) {
  const std::string marker = "#" + name + "\n";
  std::size_t start = blob.find(marker);
  if (start == std::string::npos) {
    throw CheckpointError("checkpoint blob missing section " + name);
  }
  start += marker.size();
  std::size_t end = blob.find("\n#", start);
  end = end == std::string::npos ? blob.size() : end + 1;
  return blob.substr(start, end - start);
}

}  // namespace

std::string dataset_fingerprint(const TrainConfig& cfg, const Dataset& ds) {
  std::string out;
  out += "#config\n" + cfg.to_json();
  out += "#schema\n" + ds.schema.to_json();
  out += "#users\n";
  for (const auto& n : ds.user_names) out += n + "\n";
  out += "#items\n";
  for (const auto& n : ds.item_names) out += n + "\n";
  out += "#user_vocab\n" + ds.user_vocab.to_tsv();
  out += "#item_vocab\n" + ds.item_vocab.to_tsv();
  out += "#quantizers\n";
  char buf[40];
  for (const auto& [name, centers] : ds.quantizer_centers) {
    out += name;
    for (double c : centers) {
      std::snprintf(buf, sizeof(buf), "\t%.17g", c);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void save_checkpoint(const std::string& path, TrainedModel& model,
                     const Dataset& ds) {
  std::string out;
  out.append(kMagic, 8);
  append_u32(&out, kCheckpointVersion);

  const std::string blob = dataset_fingerprint(model.config, ds);
  append_u64(&out, blob.size());
  out += blob;

  const auto params = model.parameters();
  append_u32(&out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, m] : params) {
    append_u32(&out, static_cast<std::uint32_t>(name.size()));
    out += name;
    append_u64(&out, static_cast<std::uint64_t>(m->rows()));
    append_u64(&out, static_cast<std::uint64_t>(m->cols()));
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
        rm = *m;
    out.append(reinterpret_cast<const char*>(rm.data()),
               static_cast<std::size_t>(rm.size()) * sizeof(double));
  }
  write_file(path, out);
}

namespace {

struct ParsedCheckpoint {
  std::string blob;
  std::map<std::string, Eigen::MatrixXd> matrices;
};

ParsedCheckpoint parse_checkpoint(const std::string& path) {
  const std::string data = read_file(path);
  Reader r{data};
  if (r.bytes(8) != std::string(kMagic, 8)) {
    throw CheckpointError(path + ": not a checkpoint file");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " +
                          std::to_string(version));
  }
  ParsedCheckpoint out;
  out.blob = r.bytes(r.u64());
  const std::uint32_t n = r.u32();
  for (std::uint32_t k = 0; k < n; ++k) {
    const std::string name = r.bytes(r.u32());
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    const std::size_t count = static_cast<std::size_t>(rows * cols);
    r.need(count * sizeof(double));
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
        rows, cols);
    std::memcpy(rm.data(), r.data.data() + r.pos, count * sizeof(double));
    r.pos += count * sizeof(double);
    out.matrices[name] = rm;
  }
  return out;
}

}  // namespace

CheckpointHeader read_checkpoint_header(const std::string& path) {
  const ParsedCheckpoint parsed = parse_checkpoint(path);
  CheckpointHeader header;
  header.config = TrainConfig::from_json(extract_section(parsed.blob, "config"));
  header.schema =
      AttributeSchema::from_json(extract_section(parsed.blob, "schema"));
  return header;
}

TrainedModel load_checkpoint(const std::string& path, const Dataset& ds) {
  ParsedCheckpoint parsed = parse_checkpoint(path);
  TrainConfig cfg = TrainConfig::from_json(extract_section(parsed.blob, "config"));
  if (dataset_fingerprint(cfg, ds) != parsed.blob) {
    throw CheckpointError(path + ": data directory does not match checkpoint");
  }
  TrainedModel model = make_model_shell(ds, cfg);
  auto params = model.parameters();
  if (params.size() != parsed.matrices.size()) {
    throw CheckpointError(path + ": parameter set mismatch");
  }
  for (auto& [name, m] : params) {
    auto it = parsed.matrices.find(name);
    if (it == parsed.matrices.end()) {
      throw CheckpointError(path + ": missing parameter " + name);
    }
    if (it->second.rows() != m->rows() || it->second.cols() != m->cols()) {
      throw CheckpointError(path + ": shape mismatch for " + name);
    }
    *m = it->second;
  }
  return model;
}

}  // namespace harnn
