#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "harnn/checkpoint.hpp"
#include "harnn/config.hpp"
#include "harnn/dataset.hpp"
#include "harnn/evaluator.hpp"
#include "harnn/param_store.hpp"
#include "harnn/schema.hpp"
#include "harnn/sequences.hpp"
#include "harnn/studies.hpp"
#include "harnn/synthetic.hpp"
#include "harnn/trainer.hpp"
#include "harnn/tsv.hpp"
#include "harnn/version.hpp"

namespace fs = std::filesystem;
using namespace harnn;

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split_commas(s))
    out.push_back(static_cast<int>(parse_int64(tok, "<arg>", 0)));
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& tok : split_commas(s))
    out.push_back(static_cast<std::uint64_t>(parse_int64(tok, "<arg>", 0)));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_commas(s))
    out.push_back(parse_double(tok, "<arg>", 0));
  return out;
}

Dataset load_data(const std::string& dir, const AttributeSchema& schema,
                  int min_count) {
  std::vector<std::string> warnings;
  Dataset ds = load_dataset(dir, schema, min_count, &warnings);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return ds;
}

std::vector<int> read_user_ids(const std::string& path, const Dataset& ds) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < ds.user_names.size(); ++i)
    index[ds.user_names[i]] = static_cast<int>(i);
  std::vector<int> ids;
  int line = 0;
  std::string name;
  std::istringstream in(read_file(path));
  while (std::getline(in, name)) {
    ++line;
    if (!name.empty() && name.back() == '\r') name.pop_back();
    if (name.empty()) continue;
    auto it = index.find(name);
    if (it == index.end())
      throw ParseError(path, line, "unknown user '" + name + "'");
    ids.push_back(it->second);
  }
  return ids;
}

void write_run_info(const fs::path& dir, const std::string& command,
                    std::uint64_t seed) {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["version"] = kVersion;
  write_file((dir / "run_info.json").string(), j.dump(2) + "\n");
}

// Train-config options. The config file fills in first, then any flag the
// user actually passed wins.
struct TrainFlags {
  std::string config_path;
  std::string model, cell, mode, placement, pool, share, reduction, shuffle;
  int dim = 0, batch_size = 0, max_epochs = 0, patience = 0, max_seq_len = 0,
      min_count = 0;
  double dropout = 0, learning_rate = 0, dev_fraction = 0, test_fraction = 0,
         grad_clip = 0;
  std::uint64_t seed = 0;

  CLI::Option *o_model = nullptr, *o_cell = nullptr, *o_mode = nullptr,
              *o_placement = nullptr, *o_pool = nullptr, *o_share = nullptr,
              *o_reduction = nullptr, *o_shuffle = nullptr, *o_dim = nullptr,
              *o_batch = nullptr, *o_epochs = nullptr, *o_patience = nullptr,
              *o_seq = nullptr, *o_min_count = nullptr, *o_dropout = nullptr,
              *o_lr = nullptr, *o_devf = nullptr, *o_testf = nullptr,
              *o_clip = nullptr, *o_seed = nullptr;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "train config json");
    o_model = app->add_option("--model", model)
                  ->check(CLI::IsMember({"pop", "nhmf", "harnn"}));
    o_cell = app->add_option("--cell", cell)
                 ->check(CLI::IsMember({"gru", "lstm"}));
    o_mode = app->add_option("--mode", mode)
                 ->check(CLI::IsMember({"mix", "het"}));
    o_placement = app->add_option("--placement", placement)
                      ->check(CLI::IsMember({"none", "input", "output", "both"}));
    o_pool = app->add_option("--pool", pool)
                 ->check(CLI::IsMember({"mean", "max"}));
    o_share = app->add_option("--share", share)
                  ->check(CLI::IsMember({"shared", "separate"}));
    o_reduction = app->add_option("--reduction", reduction)
                      ->check(CLI::IsMember({"sum", "average"}));
    o_shuffle = app->add_option("--shuffle", shuffle)
                    ->check(CLI::IsMember({"on", "off"}));
    o_dim = app->add_option("--dim", dim);
    o_batch = app->add_option("--batch-size", batch_size);
    o_epochs = app->add_option("--max-epochs", max_epochs);
    o_patience = app->add_option("--patience", patience);
    o_seq = app->add_option("--max-seq-len", max_seq_len);
    o_min_count = app->add_option("--min-count", min_count);
    o_dropout = app->add_option("--dropout", dropout);
    o_lr = app->add_option("--lr", learning_rate);
    o_devf = app->add_option("--dev-fraction", dev_fraction);
    o_testf = app->add_option("--test-fraction", test_fraction);
    o_clip = app->add_option("--grad-clip", grad_clip);
    o_seed = app->add_option("--seed", seed);
  }

  TrainConfig resolve() const {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = TrainConfig::from_json(read_file(config_path));
    if (o_model->count()) cfg.model = model_kind_from_string(model);
    if (o_cell->count()) cfg.cell = cell_kind_from_string(cell);
    if (o_mode->count()) cfg.mode = combination_mode_from_string(mode);
    if (o_placement->count()) cfg.placement = placement_from_string(placement);
    if (o_pool->count()) cfg.pooling = pooling_from_string(pool);
    if (o_share->count()) cfg.sharing = sharing_from_string(share);
    if (o_reduction->count()) cfg.reduction = reduction_from_string(reduction);
    if (o_shuffle->count()) cfg.shuffle = shuffle == "on";
    if (o_dim->count()) cfg.dim = dim;
    if (o_batch->count()) cfg.batch_size = batch_size;
    if (o_epochs->count()) cfg.max_epochs = max_epochs;
    if (o_patience->count()) cfg.patience = patience;
    if (o_seq->count()) cfg.max_seq_len = max_seq_len;
    if (o_min_count->count()) cfg.min_count = min_count;
    if (o_dropout->count()) cfg.dropout = dropout;
    if (o_lr->count()) cfg.learning_rate = learning_rate;
    if (o_devf->count()) cfg.dev_fraction = dev_fraction;
    if (o_testf->count()) cfg.test_fraction = test_fraction;
    if (o_clip->count()) cfg.grad_clip = grad_clip;
    if (o_seed->count()) cfg.seed = seed;
    return cfg;
  }
};

int run_ingest(const std::string& data_dir, const std::string& schema_path,
               int min_count, const std::string& out_dir) {
  AttributeSchema schema = AttributeSchema::load(schema_path);
  Dataset ds = load_data(data_dir, schema, min_count);

  std::string summary;
  summary += "users\t" + std::to_string(ds.num_users()) + "\n";
  summary += "items\t" + std::to_string(ds.num_items()) + "\n";
  summary += "interactions\t" + std::to_string(ds.interactions.size()) + "\n";
  summary += "user_vocab\t" + std::to_string(ds.user_vocab.size()) + "\n";
  summary += "item_vocab\t" + std::to_string(ds.item_vocab.size()) + "\n";
  std::fputs(summary.c_str(), stdout);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_file((out / "summary.tsv").string(), summary);
    write_file((out / "vocab_user.tsv").string(), ds.user_vocab.to_tsv());
    write_file((out / "vocab_item.tsv").string(), ds.item_vocab.to_tsv());
    std::string centers;
    for (const auto& [name, cs] : ds.quantizer_centers) {
      centers += name;
      for (double c : cs) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "\t%.17g", c);
        centers += buf;
      }
      centers += "\n";
    }
    write_file((out / "quantizers.tsv").string(), centers);
    write_run_info(out, "ingest", 0);
  }
  return 0;
}

int run_train(const std::string& data_dir, const std::string& schema_path,
              const TrainFlags& flags, const std::string& out_dir,
              const std::string& k_list, bool exclude_history,
              const std::string& users_path) {
  AttributeSchema schema = AttributeSchema::load(schema_path);
  TrainConfig cfg = flags.resolve();
  Dataset ds = load_data(data_dir, schema, cfg.min_count);
  SplitData split = prepare_split(ds.interactions, cfg);
  TrainedModel model = train_on(ds, cfg, split);

  const std::string log_tsv = epoch_log_tsv(model.log);
  std::fputs(log_tsv.c_str(), stdout);

  RankingReport report;
  const bool have_test = !split.test.empty();
  if (have_test) {
    EvalData data = make_eval_data(split.train_all, split.test);
    std::vector<int> restrict_users;
    if (!users_path.empty()) restrict_users = read_user_ids(users_path, ds);
    report = evaluate_ranker(model.ranker(), data, exclude_history,
                             parse_int_list(k_list), restrict_users);
    std::fputs(report.to_tsv().c_str(), stdout);
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_file((out / "config.json").string(), cfg.to_json());
    write_file((out / "metrics.tsv").string(), log_tsv);
    save_checkpoint((out / "checkpoint.bin").string(), model, ds);
    if (have_test) {
      write_file((out / "report.tsv").string(), report.to_tsv());
      write_file((out / "report.json").string(), report.to_json());
    }
    write_run_info(out, "train", cfg.seed);
  }
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data_dir,
             const std::string& k_list, bool exclude_history,
             const std::string& users_path, const std::string& out_dir) {
  CheckpointHeader header = read_checkpoint_header(ckpt_path);
  Dataset ds = load_data(data_dir, header.schema, header.config.min_count);
  TrainedModel model = load_checkpoint(ckpt_path, ds);

  SplitData split = prepare_split(ds.interactions, model.config);
  EvalData data = make_eval_data(split.train_all, split.test);
  std::vector<int> restrict_users;
  if (!users_path.empty()) restrict_users = read_user_ids(users_path, ds);
  RankingReport report = evaluate_ranker(model.ranker(), data, exclude_history,
                                         parse_int_list(k_list), restrict_users);
  std::fputs(report.to_tsv().c_str(), stdout);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_file((out / "report.tsv").string(), report.to_tsv());
    write_file((out / "report.json").string(), report.to_json());
    write_run_info(out, "eval", model.config.seed);
  }
  return 0;
}

int run_recommend(const std::string& ckpt_path, const std::string& data_dir,
                  const std::string& users_path, int k, bool exclude_history) {
  CheckpointHeader header = read_checkpoint_header(ckpt_path);
  Dataset ds = load_data(data_dir, header.schema, header.config.min_count);
  TrainedModel model = load_checkpoint(ckpt_path, ds);

  SplitData split = prepare_split(ds.interactions, model.config);
  std::map<int, const std::vector<int>*> context;
  std::vector<UserSequence> seqs = build_sequences(split.train_all);
  for (const auto& s : seqs) context[s.user] = &s.items;

  Ranker& ranker = model.ranker();
  const std::vector<int> empty;
  for (int user : read_user_ids(users_path, ds)) {
    auto it = context.find(user);
    const std::vector<int>& items = it == context.end() ? empty : *it->second;
    Eigen::VectorXd scores = ranker.rank_scores(user, items);
    std::vector<int> top =
        predict_top_k(scores, k, exclude_history ? items : empty);
    for (std::size_t r = 0; r < top.size(); ++r)
      std::printf("%s\t%zu\t%s\t%.12g\n", ds.user_names[user].c_str(), r + 1,
                  ds.item_names[top[r]].c_str(), scores[top[r]]);
  }
  return 0;
}

int run_nn(const std::string& ckpt_path, const std::string& data_dir,
           const std::string& item_list, int k) {
  CheckpointHeader header = read_checkpoint_header(ckpt_path);
  Dataset ds = load_data(data_dir, header.schema, header.config.min_count);
  TrainedModel model = load_checkpoint(ckpt_path, ds);
  if (!model.harnn)
    throw std::runtime_error("nn needs a harnn checkpoint");

  FrozenView view = model.harnn->frozen_view();
  Eigen::MatrixXd items = view.item_in.topRows(ds.num_items());

  std::map<std::string, int> index;
  for (std::size_t i = 0; i < ds.item_names.size(); ++i)
    index[ds.item_names[i]] = static_cast<int>(i);

  for (const auto& name : split_commas(item_list)) {
    auto it = index.find(name);
    if (it == index.end())
      throw std::invalid_argument("unknown item '" + name + "'");
    for (const auto& [nbr, cosine] : nearest_neighbors(items, it->second, k))
      std::printf("%s\t%s\t%.12g\n", name.c_str(), ds.item_names[nbr].c_str(),
                  cosine);
  }
  return 0;
}

int run_synth(const std::string& out_dir, const std::string& spec_path,
              const std::map<std::string, CLI::Option*>& opts, SynthSpec flags) {
  SynthSpec spec;
  if (!spec_path.empty()) spec = SynthSpec::from_json(read_file(spec_path));
  auto have = [&](const std::string& name) {
    return opts.at(name)->count() > 0;
  };
  if (have("users")) spec.num_users = flags.num_users;
  if (have("items")) spec.num_items = flags.num_items;
  if (have("topics")) spec.num_topics = flags.num_topics;
  if (have("min-len")) spec.min_seq_len = flags.min_seq_len;
  if (have("max-len")) spec.max_seq_len = flags.max_seq_len;
  if (have("stickiness")) spec.stickiness = flags.stickiness;
  if (have("zipf")) spec.zipf_exponent = flags.zipf_exponent;
  if (have("tag-pool")) spec.multihot_pool = flags.multihot_pool;
  if (have("tags-per-item")) spec.multihot_per_item = flags.multihot_per_item;
  if (have("seed")) spec.seed = flags.seed;

  write_synthetic(out_dir, spec);
  write_file((fs::path(out_dir) / "synth_spec.json").string(), spec.to_json());
  write_run_info(out_dir, "synth", spec.seed);
  std::printf("users\t%d\nitems\t%d\n", spec.num_users, spec.num_items);
  return 0;
}

int run_study_sampling(const std::string& data_dir,
                       const std::string& schema_path, const TrainFlags& flags,
                       const std::string& seeds, const std::string& levels,
                       double drop_prob, const std::string& out_dir) {
  AttributeSchema schema = AttributeSchema::load(schema_path);
  TrainConfig cfg = flags.resolve();
  Dataset ds = load_data(data_dir, schema, cfg.min_count);
  SamplingStudyResult res = run_sampling_study(
      ds, cfg, parse_seed_list(seeds), parse_int_list(levels), drop_prob);
  std::fputs(res.to_tsv().c_str(), stdout);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_file((out / "sampling.tsv").string(), res.to_tsv());
    write_file((out / "config.json").string(), cfg.to_json());
    write_run_info(out, "study-sampling", cfg.seed);
  }
  return 0;
}

int run_study_scaling(const std::string& data_dir,
                      const std::string& schema_path, const TrainFlags& flags,
                      const std::string& seeds, const std::string& fractions,
                      const std::string& out_dir) {
  AttributeSchema schema = AttributeSchema::load(schema_path);
  TrainConfig cfg = flags.resolve();
  Dataset ds = load_data(data_dir, schema, cfg.min_count);
  ScalingStudyResult res = run_scaling_study(ds, cfg, parse_seed_list(seeds),
                                             parse_double_list(fractions));
  std::fputs(res.to_tsv().c_str(), stdout);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_file((out / "scaling.tsv").string(), res.to_tsv());
    write_file((out / "config.json").string(), cfg.to_json());
    write_run_info(out, "study-scaling", cfg.seed);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential recommender over heterogeneous attributes"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  int rc = 0;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse data and report vocab sizes");
  std::string in_data, in_schema, in_out;
  int in_min_count = 2;
  ingest->add_option("--data", in_data)->required();
  ingest->add_option("--schema", in_schema)->required();
  ingest->add_option("--min-count", in_min_count);
  ingest->add_option("--out", in_out);
  ingest->callback(
      [&] { rc = run_ingest(in_data, in_schema, in_min_count, in_out); });

  // synth
  auto* synth = app.add_subcommand("synth", "write a topic-structured dataset");
  std::string sy_out, sy_spec;
  SynthSpec sy_flags;
  std::map<std::string, CLI::Option*> sy_opts;
  synth->add_option("--out", sy_out)->required();
  synth->add_option("--spec", sy_spec);
  sy_opts["users"] = synth->add_option("--users", sy_flags.num_users);
  sy_opts["items"] = synth->add_option("--items", sy_flags.num_items);
  sy_opts["topics"] = synth->add_option("--topics", sy_flags.num_topics);
  sy_opts["min-len"] = synth->add_option("--min-len", sy_flags.min_seq_len);
  sy_opts["max-len"] = synth->add_option("--max-len", sy_flags.max_seq_len);
  sy_opts["stickiness"] =
      synth->add_option("--stickiness", sy_flags.stickiness);
  sy_opts["zipf"] = synth->add_option("--zipf", sy_flags.zipf_exponent);
  sy_opts["tag-pool"] = synth->add_option("--tag-pool", sy_flags.multihot_pool);
  sy_opts["tags-per-item"] =
      synth->add_option("--tags-per-item", sy_flags.multihot_per_item);
  sy_opts["seed"] = synth->add_option("--seed", sy_flags.seed);
  synth->callback([&] { rc = run_synth(sy_out, sy_spec, sy_opts, sy_flags); });

  // train
  auto* train = app.add_subcommand("train", "fit a model and write artifacts");
  std::string tr_data, tr_schema, tr_out, tr_k = "2,10,30", tr_users,
              tr_exclude = "on";
  TrainFlags tr_flags;
  train->add_option("--data", tr_data)->required();
  train->add_option("--schema", tr_schema)->required();
  train->add_option("--out", tr_out);
  train->add_option("--k", tr_k);
  train->add_option("--users", tr_users);
  train->add_option("--exclude-history", tr_exclude)
      ->check(CLI::IsMember({"on", "off"}));
  tr_flags.add_to(train);
  train->callback([&] {
    rc = run_train(tr_data, tr_schema, tr_flags, tr_out, tr_k,
                   tr_exclude == "on", tr_users);
  });

  // eval
  auto* eval = app.add_subcommand("eval", "score a checkpoint on the test split");
  std::string ev_ckpt, ev_data, ev_k = "2,10,30", ev_users, ev_out,
              ev_exclude = "on";
  eval->add_option("--checkpoint", ev_ckpt)->required();
  eval->add_option("--data", ev_data)->required();
  eval->add_option("--k", ev_k);
  eval->add_option("--users", ev_users);
  eval->add_option("--out", ev_out);
  eval->add_option("--exclude-history", ev_exclude)
      ->check(CLI::IsMember({"on", "off"}));
  eval->callback([&] {
    rc = run_eval(ev_ckpt, ev_data, ev_k, ev_exclude == "on", ev_users, ev_out);
  });

  // recommend
  auto* rec = app.add_subcommand("recommend", "top-k items for listed users");
  std::string rc_ckpt, rc_data, rc_users, rc_exclude = "on";
  int rc_k = 10;
  rec->add_option("--checkpoint", rc_ckpt)->required();
  rec->add_option("--data", rc_data)->required();
  rec->add_option("--users", rc_users)->required();
  rec->add_option("--k", rc_k);
  rec->add_option("--exclude-history", rc_exclude)
      ->check(CLI::IsMember({"on", "off"}));
  rec->callback([&] {
    rc = run_recommend(rc_ckpt, rc_data, rc_users, rc_k, rc_exclude == "on");
  });

  // nn
  auto* nn = app.add_subcommand("nn", "nearest items in representation space");
  std::string nn_ckpt, nn_data, nn_items;
  int nn_k = 10;
  nn->add_option("--checkpoint", nn_ckpt)->required();
  nn->add_option("--data", nn_data)->required();
  nn->add_option("--items", nn_items)->required();
  nn->add_option("--k", nn_k);
  nn->callback([&] { rc = run_nn(nn_ckpt, nn_data, nn_items, nn_k); });

  // study-sampling
  auto* ss = app.add_subcommand("study-sampling",
                                "subsequence augmentation sweep");
  std::string ss_data, ss_schema, ss_out, ss_seeds = "1,2,3",
              ss_levels = "0,1,2,4,8";
  double ss_drop = 0.5;
  TrainFlags ss_flags;
  ss->add_option("--data", ss_data)->required();
  ss->add_option("--schema", ss_schema)->required();
  ss->add_option("--out", ss_out);
  ss->add_option("--seeds", ss_seeds);
  ss->add_option("--levels", ss_levels);
  ss->add_option("--drop", ss_drop);
  ss_flags.add_to(ss);
  ss->callback([&] {
    rc = run_study_sampling(ss_data, ss_schema, ss_flags, ss_seeds, ss_levels,
                            ss_drop, ss_out);
  });

  // study-scaling
  auto* sc = app.add_subcommand("study-scaling", "training-scale sweep");
  std::string sc_data, sc_schema, sc_out, sc_seeds = "1,2,3",
              sc_fracs = "0.2,0.44,0.76,1.0";
  TrainFlags sc_flags;
  sc->add_option("--data", sc_data)->required();
  sc->add_option("--schema", sc_schema)->required();
  sc->add_option("--out", sc_out);
  sc->add_option("--seeds", sc_seeds);
  sc->add_option("--fractions", sc_fracs);
  sc_flags.add_to(sc);
  sc->callback([&] {
    rc = run_study_scaling(sc_data, sc_schema, sc_flags, sc_seeds, sc_fracs,
                           sc_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return rc;
}
