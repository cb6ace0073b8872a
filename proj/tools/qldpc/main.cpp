// Command-line front door: code construction, dataset generation, decoder
// training and Monte Carlo sweeps, each reproducible from the printed
// effective-config block. Exit codes: 0 success, 2 usage/config error,
// 3 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qldpc/bp.hpp"
#include "qldpc/channel.hpp"
#include "qldpc/css_code.hpp"
#include "qldpc/eval.hpp"
#include "qldpc/gnn.hpp"
#include "qldpc/nbp.hpp"
#include "qldpc/osd.hpp"
#include "qldpc/tanner.hpp"

namespace {

using nlohmann::json;
using namespace qldpc;

/// Configuration mistakes the user can fix; mapped to exit code 2.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

void require_input_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw UsageError(what + " path is empty");
  if (!std::filesystem::is_regular_file(path))
    throw UsageError(what + " not found: " + path);
}

/// Output files are only ever created inside existing directories, so a bad
/// --out fails before anything is written.
void require_output_location(const std::string& path, const std::string& what) {
  if (path.empty()) throw UsageError(what + " path is empty");
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw UsageError(what + " directory does not exist: " + parent.string());
}

std::size_t default_workers() {
  const char* env = std::getenv("QLDPC_WORKERS");
  if (env == nullptr) return 1;
  const long v = std::atol(env);
  return v >= 1 ? static_cast<std::size_t>(v) : 1;
}

void echo_config(const json& cfg) {
  std::cout << "effective config:\n" << cfg.dump(2) << "\n";
}

// ---------------------------------------------------------------- code build

struct CodeBuildArgs {
  std::string family;
  std::uint64_t seed = 7;  // bicycle circulant seed; hgp is deterministic
  std::string out;
};

json to_json(const CodeBuildArgs& a) {
  return {{"command", "code build"}, {"family", a.family}, {"seed", a.seed},
          {"out", a.out}};
}

CssCode cmd_code_build(const CodeBuildArgs& a) {
  echo_config(to_json(a));
  if (!a.out.empty()) require_output_location(a.out, "--out");

  CssCode code;
  if (a.family == "hgp") {
    const auto [c7, c15] = bch_seed_codes();
    code = build_hgp(c7, c15);
  } else if (a.family == "bicycle") {
    code = build_bicycle(256, 32, 8, a.seed);
  } else {
    throw UsageError("unknown family '" + a.family + "' (expected hgp or bicycle)");
  }

  std::cout << "name: " << code.name << "\n"
            << "[[n, k]] = [[" << code.n << ", " << code.k << "]]\n"
            << "checks: " << code.m() << " (hx " << code.hx.rows() << " + hz "
            << code.hz.rows() << ")\n"
            << "row weight bound: " << code.row_bound << "\n"
            << "col weight bound: " << code.col_bound << "\n";
  if (!a.out.empty()) {
    save_code_bundle(code, a.out);
    std::cout << "wrote code bundle: " << a.out << "\n";
  }
  return code;
}

// ------------------------------------------------------------------ data gen

struct DataGenArgs {
  std::string code_path;  // empty when the code object is supplied directly
  double p_f = 0.01;
  std::size_t count = 0;
  std::string recipe;  // "train" | "test"
  std::uint64_t seed = 1;
  std::string out;
};

json to_json(const DataGenArgs& a) {
  return {{"command", "data gen"}, {"code", a.code_path}, {"pf", a.p_f},
          {"count", a.count},      {"recipe", a.recipe},  {"seed", a.seed},
          {"out", a.out}};
}

void cmd_data_gen(const DataGenArgs& a, const CssCode& code) {
  echo_config(to_json(a));
  require_output_location(a.out, "--out");
  if (a.recipe != "train" && a.recipe != "test")
    throw UsageError("unknown recipe '" + a.recipe + "' (expected train or test)");

  const Dataset ds = a.recipe == "train"
                         ? gen_training_set(code, {a.p_f}, a.count, a.seed)
                         : gen_test_set(code, {a.p_f}, a.count, a.seed);
  save_dataset(ds, a.out);
  std::cout << "wrote dataset: " << a.out << " (" << ds.entries.size() << " entries, code "
            << ds.code_name << ")\n";
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  std::string kind;  // "gnn" | "nbp"
  std::string code_path;
  std::string data_path;
  std::string out;
  std::string resume;

  double lr = 4e-4;
  std::size_t batch = 32;
  double clip = 0.5;
  std::size_t epochs = 0;  // 0 at parse time = use the kind default below
  bool epochs_given = false;
  std::uint64_t seed = 1;
  double budget_seconds = 0.0;

  // gnn
  std::size_t layers = 6;
  std::size_t embed_dim = 128;
  std::size_t msg_dim = 128;
  std::size_t chunk = 8;
  double plateau_eps = 1e-4;
  std::size_t plateau_epochs = 10;
  bool untied = false;
  bool simultaneous = false;

  // nbp
  std::size_t iterations = 12;
  bool tied = false;
};

std::size_t default_epochs(const std::string& kind) { return kind == "gnn" ? 200 : 30; }

json to_json(const TrainArgs& a) {
  json j{{"command", "train"},       {"kind", a.kind},
         {"code", a.code_path},      {"data", a.data_path},
         {"out", a.out},             {"resume", a.resume},
         {"lr", a.lr},               {"minibatch", a.batch},
         {"clip_norm", a.clip},      {"epochs", a.epochs},
         {"seed", a.seed},           {"budget_seconds", a.budget_seconds}};
  if (a.kind == "gnn") {
    j["layers"] = a.layers;
    j["embed_dim"] = a.embed_dim;
    j["msg_dim"] = a.msg_dim;
    j["chunk"] = a.chunk;
    j["plateau_eps"] = a.plateau_eps;
    j["plateau_epochs"] = a.plateau_epochs;
    j["untied"] = a.untied;
    j["simultaneous"] = a.simultaneous;
  } else {
    j["iterations"] = a.iterations;
    j["tied"] = a.tied;
  }
  return j;
}

std::string loss_csv_path(const std::string& out) {
  return std::filesystem::path(out).replace_extension(".loss.csv").string();
}

Dataset load_dataset_for(const CssCode& code, const std::string& path) {
  require_input_file(path, "dataset");
  try {
    return load_dataset(path, code);
  } catch (const std::exception& e) {
    throw UsageError("dataset '" + path + "' does not fit the code: " + e.what());
  }
}

void cmd_train(TrainArgs a, const CssCode& code) {
  if (!a.epochs_given) a.epochs = default_epochs(a.kind);
  echo_config(to_json(a));
  require_output_location(a.out, "--out");
  if (!a.resume.empty()) {
    require_input_file(a.resume, "--resume checkpoint");
    json doc;
    try {
      std::ifstream in(a.resume);
      in >> doc;
    } catch (const json::exception& e) {
      throw UsageError("--resume checkpoint is not valid JSON: " + std::string(e.what()));
    }
    const std::string type =
        doc.value("hyperparams", json::object()).value("type", "");
    if (type != a.kind)
      throw UsageError("--resume checkpoint has type '" + type + "', expected '" +
                       a.kind + "'");
  }
  const Dataset ds = load_dataset_for(code, a.data_path);
  const std::string csv = loss_csv_path(a.out);

  json metadata{{"code", code.name},
                {"code_hash", code_hash(code)},
                {"dataset", a.data_path},
                {"dataset_entries", ds.entries.size()}};

  double initial = 0.0, final_loss = 0.0;
  std::size_t epochs_done = 0, steps = 0;
  std::string stop_reason;

  if (a.kind == "gnn") {
    GnnTrainConfig cfg;
    cfg.hp.layers = a.layers;
    cfg.hp.embed_dim = a.embed_dim;
    cfg.hp.msg_dim = a.msg_dim;
    cfg.hp.lr = a.lr;
    cfg.hp.minibatch = a.batch;
    cfg.hp.clip_norm = a.clip;
    cfg.hp.epochs = a.epochs;
    cfg.hp.seed = a.seed;
    cfg.hp.untied = a.untied;
    cfg.hp.simultaneous = a.simultaneous;
    cfg.chunk = a.chunk;
    cfg.time_budget_seconds = a.budget_seconds;
    cfg.plateau_eps = a.plateau_eps;
    cfg.plateau_epochs = a.plateau_epochs;
    cfg.log_csv_path = csv;
    cfg.resume_checkpoint = a.resume;

    const GnnTrainResult r = train_gnn(code, ds, cfg);
    initial = r.initial_loss;
    final_loss = r.epoch_loss.empty() ? r.initial_loss : r.epoch_loss.back();
    epochs_done = r.epochs_completed;
    steps = r.model.store.step();
    stop_reason = r.stop_reason;
    metadata["stop_reason"] = stop_reason;
    metadata["epochs_completed"] = epochs_done;
    save_gnn_model(r.model, a.out, metadata);
  } else if (a.kind == "nbp") {
    NbpTrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.lr = a.lr;
    cfg.clip_norm = a.clip;
    cfg.iterations = a.iterations;
    cfg.tied = a.tied;
    cfg.seed = a.seed;
    cfg.time_budget_seconds = a.budget_seconds;
    cfg.resume_checkpoint = a.resume;

    const NbpTrainResult r = train_nbp(code, ds, cfg);
    initial = r.initial_loss;
    final_loss = r.final_loss;
    epochs_done = r.epochs_completed;
    steps = r.model.store.step();
    stop_reason = r.stop_reason;
    metadata["stop_reason"] = stop_reason;
    metadata["epochs_completed"] = epochs_done;
    save_nbp_model(r.model, a.out, metadata);

    std::ofstream log(csv, std::ios::trunc);
    if (!log) throw std::runtime_error("cannot write " + csv);
    log << "epoch,mean_loss\n";
    for (std::size_t i = 0; i < r.epoch_loss.size(); ++i)
      log << (i + 1) << ',' << r.epoch_loss[i] << '\n';
  } else {
    throw UsageError("unknown trainer '" + a.kind + "' (expected gnn or nbp)");
  }

  std::cout << "initial loss: " << initial << "\n"
            << "final loss: " << final_loss << "\n"
            << "epochs completed: " << epochs_done << " (" << stop_reason << ")\n"
            << "optimizer steps: " << steps << "\n"
            << "wrote checkpoint: " << a.out << "\n"
            << "wrote loss csv: " << csv << "\n";
}

// --------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string code_path;
  std::string decoder;  // bp | bp-osd | nbp | gnn
  std::string model;
  std::vector<double> pf_list;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  std::string out_prefix;
  std::size_t workers = default_workers();
  bool adaptive = false;
  std::size_t min_failures = 100;
  std::size_t batch = 256;
  std::size_t order = 0;
  std::size_t osd_limit = 0;
  bool osd_sweep = false;
  std::size_t bp_iters = 12;
  std::size_t chunk = 16;
};

json to_json(const SweepArgs& a) {
  return {{"command", "sweep"},
          {"code", a.code_path},
          {"decoder", a.decoder},
          {"model", a.model},
          {"pf_list", a.pf_list},
          {"trials", a.trials},
          {"seed", a.seed},
          {"out", a.out_prefix},
          {"workers", a.workers},
          {"adaptive", a.adaptive},
          {"min_failures", a.min_failures},
          {"batch", a.batch},
          {"order", a.order},
          {"osd_limit", a.osd_limit},
          {"osd_sweep", a.osd_sweep},
          {"bp_iters", a.bp_iters},
          {"chunk", a.chunk}};
}

std::unique_ptr<Decoder> build_decoder(const SweepArgs& a, const CssCode& code) {
  BpConfig bp;
  bp.max_iter = a.bp_iters;
  if (a.decoder == "bp") return make_bp_decoder(code, bp);
  if (a.decoder == "bp-osd") {
    OsdConfig osd;
    osd.order = a.order;
    osd.candidate_limit = a.osd_limit;
    osd.combination_sweep = a.osd_sweep;
    return make_bp_osd_decoder(code, osd, bp);
  }
  if (a.decoder == "nbp") {
    if (a.model.empty()) throw UsageError("decoder 'nbp' requires --model");
    require_input_file(a.model, "--model");
    NbpConfig cfg;
    return make_nbp_decoder(code, load_nbp_model(a.model), cfg);
  }
  if (a.decoder == "gnn") {
    if (a.model.empty()) throw UsageError("decoder 'gnn' requires --model");
    require_input_file(a.model, "--model");
    return make_gnn_decoder(code, load_gnn_model(a.model), a.chunk);
  }
  throw UsageError("unknown decoder '" + a.decoder +
                   "' (expected bp, bp-osd, nbp or gnn)");
}

std::vector<CurvePoint> cmd_sweep(const SweepArgs& a, const CssCode& code) {
  echo_config(to_json(a));
  require_output_location(a.out_prefix, "--out");
  const std::unique_ptr<Decoder> decoder = build_decoder(a, code);

  SweepConfig cfg;
  cfg.p_f_list = a.pf_list;
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.workers = a.workers;
  cfg.adaptive_stop = a.adaptive;
  cfg.min_failures = a.min_failures;
  cfg.batch = a.batch;

  const std::vector<CurvePoint> curve = run_sweep(code, *decoder, cfg);
  for (const CurvePoint& pt : curve)
    std::cout << "p_f=" << pt.p_f << " trials=" << pt.trials << " failures=" << pt.failures
              << " ler=" << pt.ler << " ci=[" << pt.ci_low << ", " << pt.ci_high << "]\n";

  const std::string xy = a.out_prefix + ".txt";
  const std::string csv = a.out_prefix + ".csv";
  const std::string comment = decoder->name() + " on " + code.name + ", trials=" +
                              std::to_string(a.trials) + ", seed=" + std::to_string(a.seed);
  write_curve_xy(curve, xy, comment);
  write_curve_csv(curve, csv);
  std::cout << "wrote curve: " << xy << "\n" << "wrote curve: " << csv << "\n";
  return curve;
}

// ------------------------------------------------------------------- run

CssCode load_code_for(const std::string& path) {
  require_input_file(path, "code bundle");
  return load_code_bundle(path);
}

/// One experiment from one JSON document: a code section plus optional
/// dataset, train and sweep sections, executed in that order. Section seeds
/// default to the global seed.
int cmd_run(const std::string& config_path) {
  require_input_file(config_path, "config");
  json j;
  {
    std::ifstream in(config_path);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "seed" && key != "code" && key != "dataset" && key != "train" &&
        key != "sweep")
      throw UsageError("unknown config section '" + key + "'");
  }
  const std::uint64_t global_seed = j.value("seed", std::uint64_t{1});
  std::cout << "global seed: " << global_seed << "\n";
  if (!j.contains("code")) throw UsageError("config needs a \"code\" section");

  CssCode code;
  const json& jc = j.at("code");
  if (jc.contains("bundle")) {
    code = load_code_for(jc.at("bundle").get<std::string>());
    echo_config({{"command", "code load"}, {"bundle", jc.at("bundle").get<std::string>()}});
    std::cout << "name: " << code.name << " [[" << code.n << ", " << code.k << "]]\n";
  } else {
    CodeBuildArgs a;
    a.family = jc.value("family", "");
    a.seed = jc.value("seed", std::uint64_t{7});
    a.out = jc.value("out", "");
    code = cmd_code_build(a);
  }

  std::string dataset_path;
  if (j.contains("dataset")) {
    const json& jd = j.at("dataset");
    DataGenArgs a;
    a.p_f = jd.value("pf", 0.01);
    a.count = jd.value("count", std::size_t{0});
    a.recipe = jd.value("recipe", "train");
    a.seed = jd.value("seed", global_seed);
    if (!jd.contains("path")) throw UsageError("dataset section needs \"path\"");
    a.out = jd.at("path").get<std::string>();
    cmd_data_gen(a, code);
    dataset_path = a.out;
  }

  std::string checkpoint_path;
  if (j.contains("train")) {
    const json& jt = j.at("train");
    TrainArgs a;
    a.kind = jt.value("kind", "");
    a.data_path = jt.value("data", dataset_path);
    if (a.data_path.empty()) throw UsageError("train section needs \"data\" (or a dataset section)");
    if (!jt.contains("checkpoint")) throw UsageError("train section needs \"checkpoint\"");
    a.out = jt.at("checkpoint").get<std::string>();
    a.resume = jt.value("resume", "");
    a.lr = jt.value("lr", a.lr);
    a.batch = jt.value("minibatch", a.batch);
    a.clip = jt.value("clip_norm", a.clip);
    a.epochs = jt.value("epochs", default_epochs(a.kind));
    a.epochs_given = true;
    a.seed = jt.value("seed", global_seed);
    a.budget_seconds = jt.value("budget_seconds", a.budget_seconds);
    a.layers = jt.value("layers", a.layers);
    a.embed_dim = jt.value("embed_dim", a.embed_dim);
    a.msg_dim = jt.value("msg_dim", a.msg_dim);
    a.chunk = jt.value("chunk", a.chunk);
    a.plateau_eps = jt.value("plateau_eps", a.plateau_eps);
    a.plateau_epochs = jt.value("plateau_epochs", a.plateau_epochs);
    a.untied = jt.value("untied", a.untied);
    a.simultaneous = jt.value("simultaneous", a.simultaneous);
    a.iterations = jt.value("iterations", a.iterations);
    a.tied = jt.value("tied", a.tied);
    cmd_train(a, code);
    checkpoint_path = a.out;
  }

  if (j.contains("sweep")) {
    const json& js = j.at("sweep");
    SweepArgs a;
    a.decoder = js.value("decoder", "");
    a.model = js.value("model", checkpoint_path);
    if (!js.contains("pf_list")) throw UsageError("sweep section needs \"pf_list\"");
    a.pf_list = js.at("pf_list").get<std::vector<double>>();
    a.trials = js.value("trials", a.trials);
    a.seed = js.value("seed", global_seed);
    if (!js.contains("out_prefix")) throw UsageError("sweep section needs \"out_prefix\"");
    a.out_prefix = js.at("out_prefix").get<std::string>();
    a.workers = js.value("workers", a.workers);
    a.adaptive = js.value("adaptive", a.adaptive);
    a.min_failures = js.value("min_failures", a.min_failures);
    a.batch = js.value("batch", a.batch);
    a.order = js.value("order", a.order);
    a.osd_limit = js.value("osd_limit", a.osd_limit);
    a.osd_sweep = js.value("osd_sweep", a.osd_sweep);
    a.bp_iters = js.value("bp_iters", a.bp_iters);
    a.chunk = js.value("chunk", a.chunk);
    cmd_sweep(a, code);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qldpc decoding workbench"};
  app.require_subcommand(1);

  // code build
  CodeBuildArgs code_args;
  CLI::App* code_cmd = app.add_subcommand("code", "construct css codes");
  code_cmd->require_subcommand(1);
  CLI::App* code_build = code_cmd->add_subcommand("build", "build a code and report [[n, k]]");
  code_build->add_option("--family", code_args.family, "hgp or bicycle")->required();
  code_build->add_option("--seed", code_args.seed, "bicycle circulant seed (default 7)");
  code_build->add_option("--out", code_args.out, "write a code bundle here");

  // data gen
  DataGenArgs data_args;
  CLI::App* data_cmd = app.add_subcommand("data", "generate datasets");
  data_cmd->require_subcommand(1);
  CLI::App* data_gen = data_cmd->add_subcommand("gen", "sample a dataset from the channel");
  data_gen->add_option("--code", data_args.code_path, "code bundle path")->required();
  data_gen->add_option("--pf", data_args.p_f, "flip probability")->required();
  data_gen->add_option("--count", data_args.count, "entry count")->required();
  data_gen->add_option("--recipe", data_args.recipe, "train or test")->required();
  data_gen->add_option("--seed", data_args.seed, "sampling seed (default 1)");
  data_gen->add_option("--out", data_args.out, "output JSON Lines path")->required();

  // train
  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a neural decoder");
  train_cmd->add_option("kind", train_args.kind, "gnn or nbp")
      ->required()
      ->check(CLI::IsMember({"gnn", "nbp"}));
  train_cmd->add_option("--code", train_args.code_path, "code bundle path")->required();
  train_cmd->add_option("--data", train_args.data_path, "training dataset path")->required();
  train_cmd->add_option("--out", train_args.out, "checkpoint output path")->required();
  train_cmd->add_option("--resume", train_args.resume, "continue from this checkpoint");
  train_cmd->add_option("--lr", train_args.lr, "learning rate (default 4e-4)");
  train_cmd->add_option("--batch", train_args.batch, "minibatch size (default 32)");
  train_cmd->add_option("--clip", train_args.clip, "gradient clip norm (default 0.5)");
  CLI::Option* epochs_opt =
      train_cmd->add_option("--epochs", train_args.epochs, "epochs (default: gnn 200, nbp 30)");
  train_cmd->add_option("--seed", train_args.seed, "training seed (default 1)");
  train_cmd->add_option("--budget-seconds", train_args.budget_seconds,
                        "wall-clock budget, 0 = none");
  train_cmd->add_option("--layers", train_args.layers, "gnn: message-passing rounds (default 6)");
  train_cmd->add_option("--embed-dim", train_args.embed_dim, "gnn: embedding size (default 128)");
  train_cmd->add_option("--msg-dim", train_args.msg_dim, "gnn: message size (default 128)");
  train_cmd->add_option("--chunk", train_args.chunk, "gnn: graphs per tape (default 8)");
  train_cmd->add_option("--plateau-eps", train_args.plateau_eps, "gnn: plateau threshold");
  train_cmd->add_option("--plateau-epochs", train_args.plateau_epochs, "gnn: plateau patience");
  train_cmd->add_flag("--untied", train_args.untied, "gnn: per-round parameters");
  train_cmd->add_flag("--simultaneous", train_args.simultaneous,
                      "gnn: variables read pre-round check embeddings");
  train_cmd->add_option("--iterations", train_args.iterations, "nbp: bp iterations (default 12)");
  train_cmd->add_flag("--tied", train_args.tied, "nbp: share weights across iterations");

  // sweep
  SweepArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "logical-error-rate curve");
  sweep_cmd->add_option("--code", sweep_args.code_path, "code bundle path")->required();
  sweep_cmd->add_option("--decoder", sweep_args.decoder, "bp, bp-osd, nbp or gnn")->required();
  sweep_cmd->add_option("--model", sweep_args.model, "checkpoint for nbp/gnn");
  sweep_cmd->add_option("--pf-list", sweep_args.pf_list, "comma-separated flip probabilities")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--trials", sweep_args.trials, "trials per point")->required();
  sweep_cmd->add_option("--seed", sweep_args.seed, "sweep seed (default 1)");
  sweep_cmd->add_option("--out", sweep_args.out_prefix, "output prefix for .txt/.csv")
      ->required();
  sweep_cmd->add_option("--workers", sweep_args.workers,
                        "worker threads (default: QLDPC_WORKERS or 1)");
  sweep_cmd->add_flag("--adaptive", sweep_args.adaptive,
                      "stop a point early at --min-failures failures");
  sweep_cmd->add_option("--min-failures", sweep_args.min_failures,
                        "adaptive stop threshold (default 100)");
  sweep_cmd->add_option("--batch", sweep_args.batch, "trials per decode batch (default 256)");
  sweep_cmd->add_option("--order", sweep_args.order, "bp-osd: osd order (default 0)");
  sweep_cmd->add_option("--osd-limit", sweep_args.osd_limit,
                        "bp-osd: candidate cap, 0 = none");
  sweep_cmd->add_flag("--osd-sweep", sweep_args.osd_sweep,
                      "bp-osd: combination sweep instead of full enumeration");
  sweep_cmd->add_option("--bp-iters", sweep_args.bp_iters, "bp iterations (default 12)");
  sweep_cmd->add_option("--chunk", sweep_args.chunk, "gnn: graphs per forward pass");

  // run
  std::string run_config;
  CLI::App* run_cmd = app.add_subcommand("run", "execute one experiment config");
  run_cmd->add_option("--config", run_config, "experiment JSON document")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (code_build->parsed()) {
      cmd_code_build(code_args);
    } else if (data_gen->parsed()) {
      const CssCode code = load_code_for(data_args.code_path);
      cmd_data_gen(data_args, code);
    } else if (train_cmd->parsed()) {
      train_args.epochs_given = epochs_opt->count() > 0;
      const CssCode code = load_code_for(train_args.code_path);
      cmd_train(train_args, code);
    } else if (sweep_cmd->parsed()) {
      const CssCode code = load_code_for(sweep_args.code_path);
      cmd_sweep(sweep_args, code);
    } else if (run_cmd->parsed()) {
      return cmd_run(run_config);
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
