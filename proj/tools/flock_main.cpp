// flock: random-walk knowledge-graph model - training, evaluation,
// prediction, benchmark generation, and verification suites.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "CLI11.hpp"
#include "json.hpp"

#include "flock/checkpoint.hpp"
#include "flock/config.hpp"
#include "flock/eval.hpp"
#include "flock/log.hpp"
#include "flock/petals.hpp"
#include "flock/stats.hpp"
#include "flock/threads.hpp"
#include "flock/train.hpp"
#include "flock/verify.hpp"

namespace {

using namespace flock;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct GlobalFlags {
  uint64_t seed = 0;
  int threads = 1;
  std::string log_level = "info";
};

void apply_log_level(const std::string& level) {
  if (level == "debug") set_log_level(LogLevel::kDebug);
  else if (level == "info") set_log_level(LogLevel::kInfo);
  else if (level == "warn") set_log_level(LogLevel::kWarn);
  else if (level == "error") set_log_level(LogLevel::kError);
  else throw std::runtime_error("--log-level must be debug|info|warn|error");
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

// Keys accepted in train config files; documented in the README.
const std::set<std::string> kConfigKeys = {
    "task",        "walk_length", "base_walks", "update_steps", "heads",
    "head_dim",    "lr",          "negatives",  "batch_size",   "adv_temp",
    "weight_decay", "steps",      "ensemble",   "seed",         "dataset_dir",
    "out_dir",     "val_every",   "mask_query_edges", "filter_negatives",
    "tie_update_weights", "resample_walks", "dedup", "init_std"};

ModelConfig model_config_from(const RunConfig& cfg) {
  ModelConfig mc;
  mc.heads = static_cast<int>(cfg.get_long("heads", 4));
  mc.head_dim = static_cast<int>(cfg.get_long("head_dim", 16));
  mc.hidden_dim = mc.heads * mc.head_dim;
  mc.update_steps = static_cast<int>(cfg.get_long("update_steps", 6));
  mc.walk_len = static_cast<int>(cfg.get_long("walk_length", 128));
  mc.base_walks = static_cast<int>(cfg.get_long("base_walks", 128));
  mc.max_passes = static_cast<int>(cfg.get_long("ensemble", 16));
  mc.tie_update_weights = cfg.get_bool("tie_update_weights", false);
  mc.resample_walks = cfg.get_bool("resample_walks", true);
  mc.init_std = cfg.get_double("init_std", 0.08);
  return mc;
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig tc;
  tc.task = cfg.get_string("task", "entity");
  tc.negatives = static_cast<int>(cfg.get_long("negatives", 512));
  tc.batch_size = static_cast<int>(cfg.get_long("batch_size", 8));
  tc.lr = cfg.get_double("lr", 5e-4);
  tc.adv_temp = cfg.get_double("adv_temp", 1.0);
  tc.weight_decay = cfg.get_double("weight_decay", tc.task == "relation" ? 0.0 : 0.01);
  tc.steps = cfg.get_long("steps", 1000);
  tc.seed = static_cast<uint64_t>(cfg.get_long("seed", 0));
  tc.val_every = cfg.get_long("val_every", 500);
  tc.mask_query_edges = cfg.get_bool("mask_query_edges", true);
  tc.filter_negatives = cfg.get_bool("filter_negatives", true);
  return tc;
}

bool is_petals_dir(const std::string& dir) {
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "metadata.json"))
      return true;
  return false;
}

double petals_model_accuracy(FlockModel& model, const std::vector<PetalsInstance>& instances,
                             int passes, int walks, uint64_t seed, int threads) {
  std::vector<std::pair<double, double>> scores(instances.size());
  Rng root(seed);
  parallel_for(static_cast<int>(instances.size()), threads, [&](int i) {
    const PetalsInstance& inst = instances[i];
    nn::Array s = model.ensemble(GraphView(inst.graph), inst.query, passes, walks,
                                 root.substream(i));
    scores[i] = {s.data[inst.true_target], s.data[inst.false_target]};
  });
  return petals_accuracy(scores);
}

int cmd_train(const RunConfig& cfg, const GlobalFlags& flags) {
  std::string dataset_dir = cfg.get_string("dataset_dir", "");
  std::string out_dir = cfg.get_string("out_dir", "runs/train");
  if (dataset_dir.empty()) throw std::runtime_error("train: dataset_dir is required");

  ModelConfig mc = model_config_from(cfg);
  TrainConfig tc = train_config_from(cfg);
  FlockModel model(mc, Rng(tc.seed).substream(101).seed());
  int val_passes = std::min(4, mc.max_passes);

  if (is_petals_dir(dataset_dir)) {
    log_info("training on benchmark instances from " + dataset_dir);
    auto instances = load_petals_benchmark(dataset_dir);
    std::vector<TrainExample> examples;
    for (const PetalsInstance& inst : instances)
      examples.push_back({&inst.graph, inst.query, inst.true_target});
    ExampleListDataset data(std::move(examples));
    auto validate = [&](FlockModel& m) {
      return petals_model_accuracy(m, instances, val_passes, mc.base_walks,
                                   Rng(tc.seed).substream(102).seed(), flags.threads);
    };
    TrainResult result = train(model, data, tc, validate, out_dir);
    log_info("best validation accuracy " + std::to_string(result.best_metric) + " at step " +
             std::to_string(result.best_step));
    std::cout << "checkpoint: " << result.checkpoint_path << "\n";
    return kExitOk;
  }

  bool dedup = cfg.get_bool("dedup", true);
  KnowledgeGraph context = load_triples(dataset_dir + "/train.txt", dedup);
  std::vector<Triple> valid;
  if (std::filesystem::exists(dataset_dir + "/valid.txt"))
    valid = load_triples_into(context, dataset_dir + "/valid.txt", dedup);
  KgTripleDataset data(context, context.triples(), tc.task);

  FilterIndex filter;
  filter.add(context.triples());
  filter.add(valid);
  std::function<double(FlockModel&)> validate;
  if (!valid.empty()) {
    validate = [&, val_passes](FlockModel& m) {
      EvalOptions opt;
      opt.passes = val_passes;
      opt.walks = mc.base_walks;
      opt.threads = flags.threads;
      opt.seed = Rng(tc.seed).substream(102).seed();
      std::vector<Triple> subset = valid;
      if (subset.size() > 50) subset.resize(50);
      MetricReport report = tc.task == "relation"
                                ? evaluate_relation(m, context, subset, filter, opt)
                                : evaluate_entity(m, context, subset, filter, opt);
      return report.mrr;
    };
  }
  TrainResult result = train(model, data, tc, validate, out_dir);
  log_info("final loss " + std::to_string(result.final_loss));
  std::cout << "checkpoint: " << result.checkpoint_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& dataset_dir,
             const std::string& task, int passes, const std::string& walks_arg, bool tail_only,
             const std::string& split, const std::string& out_csv, const GlobalFlags& flags) {
  LoadedCheckpoint loaded = load_checkpoint(checkpoint);
  FlockModel& model = *loaded.model;

  KnowledgeGraph context = load_triples(dataset_dir + "/train.txt");
  std::vector<Triple> valid, test;
  if (std::filesystem::exists(dataset_dir + "/valid.txt"))
    valid = load_triples_into(context, dataset_dir + "/valid.txt");
  if (std::filesystem::exists(dataset_dir + "/test.txt"))
    test = load_triples_into(context, dataset_dir + "/test.txt");
  const std::vector<Triple>& eval_triples = split == "valid" ? valid : test;
  if (eval_triples.empty()) throw std::runtime_error("eval: no " + split + " triples");

  FilterIndex filter;
  filter.add(context.triples());
  filter.add(valid);
  filter.add(test);

  EvalOptions options;
  options.passes = passes;
  options.tail_only = tail_only;
  options.threads = flags.threads;
  options.seed = flags.seed;
  options.policy.n_train = model.config().base_walks;
  options.policy.mean_train_entities = context.num_entities();
  options.policy.mean_train_edges = static_cast<double>(context.triples().size());
  if (walks_arg == "auto") {
    options.walks = 0;  // adapt from the policy
  } else {
    options.walks = std::stoi(walks_arg);
  }

  std::vector<PerQueryRank> per_query;
  MetricReport report = task == "relation"
                            ? evaluate_relation(model, context, eval_triples, filter, options,
                                                &per_query)
                            : evaluate_entity(model, context, eval_triples, filter, options,
                                              &per_query);

  nlohmann::json out;
  out["task"] = task;
  out["queries"] = report.count;
  out["mrr"] = report.mrr;
  for (auto& [k, v] : report.hits_at) out["hits@" + std::to_string(k)] = v;
  std::cout << out.dump(2) << "\n";
  if (!out_csv.empty()) {
    std::ofstream csv(out_csv);
    csv << "query,rank,candidates\n";
    for (const PerQueryRank& q : per_query)
      csv << q.query << "," << q.rank << "," << q.candidates << "\n";
    if (!csv) throw std::runtime_error("eval: cannot write " + out_csv);
  }
  return kExitOk;
}

int cmd_predict(const std::string& checkpoint, const std::string& graph_path,
                const std::string& query_str, int passes, int walks, int top_k,
                const GlobalFlags& flags) {
  LoadedCheckpoint loaded = load_checkpoint(checkpoint);
  FlockModel& model = *loaded.model;
  KnowledgeGraph g = load_triples(graph_path);

  std::istringstream in(query_str);
  std::string head, rel, tail;
  if (!(in >> head >> rel >> tail))
    throw std::runtime_error("predict: query must be 'head rel ?' or 'head ? tail'");
  Query q;
  bool entity_task = tail == "?";
  if (entity_task) {
    int h = g.entity_id(head), r = g.relation_id(rel);
    if (h < 0 || r < 0) throw std::runtime_error("predict: unknown head or relation name");
    q = Query::entity(h, r);
  } else if (rel == "?") {
    int h = g.entity_id(head), t = g.entity_id(tail);
    if (h < 0 || t < 0) throw std::runtime_error("predict: unknown entity name");
    q = Query::relation(h, t);
  } else {
    throw std::runtime_error("predict: exactly one of rel/tail must be '?'");
  }

  if (walks <= 0) walks = model.config().base_walks;
  nn::Array scores = model.ensemble(GraphView(g), q, passes, walks, Rng(flags.seed));
  std::vector<int> order(scores.rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores.data[a] > scores.data[b]; });
  int shown = std::min<int>(top_k, scores.rows);
  for (int i = 0; i < shown; ++i) {
    int c = order[i];
    const std::string& name = entity_task ? g.entity_names()[c] : g.relation_names()[c];
    std::printf("%2d  %-24s %.6f\n", i + 1, name.c_str(), scores.data[c]);
  }
  return kExitOk;
}

int cmd_walk_bench(const std::string& graph_path, const std::string& lengths_csv, int samples,
                   const std::string& out_path, const GlobalFlags& flags) {
  KnowledgeGraph g = load_triples(graph_path);
  std::ofstream file;
  std::ostream& out = open_output(file, out_path);
  out << "l,cover_fraction,mean_steps_to_cover\n";
  std::istringstream in(lengths_csv);
  std::string token;
  while (std::getline(in, token, ',')) {
    int length = std::stoi(token);
    CoverStats stats = measure_edge_cover(g, length, samples, Rng(flags.seed));
    out << stats.length << "," << stats.cover_fraction << "," << stats.mean_steps_to_cover
        << "\n";
  }
  return kExitOk;
}

int cmd_petals_gen(const std::string& out_dir, const GlobalFlags& flags) {
  auto instances = generate_benchmark(flags.seed);
  save_petals_benchmark(out_dir, instances);
  std::cout << "wrote " << instances.size() << " instances to " << out_dir << "\n";
  return kExitOk;
}

int cmd_petals_eval(const std::string& checkpoint, const std::string& dir, int passes,
                    int walks, const GlobalFlags& flags) {
  LoadedCheckpoint loaded = load_checkpoint(checkpoint);
  FlockModel& model = *loaded.model;
  auto instances = load_petals_benchmark(dir);
  if (walks <= 0) walks = model.config().base_walks;
  double accuracy =
      petals_model_accuracy(model, instances, passes, walks, flags.seed, flags.threads);
  nlohmann::json out;
  out["instances"] = instances.size();
  out["passes"] = passes;
  out["accuracy"] = accuracy;
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_gradcheck() {
  // layer-by-layer and end-to-end finite-difference checks; mirrors the
  // gradient acceptance suite at unit scale
  Rng rng(123);
  nn::Array x(3, 4);
  for (double& v : x.data) v = rng.normal();
  nn::Array w(4, 4), mixer(3, 4);
  for (double& v : w.data) v = rng.normal();
  for (double& v : mixer.data) v = rng.normal();
  double worst = 0.0;
  auto run = [&](const char* name, const std::function<nn::Tensor(nn::Tape&, nn::Tensor)>& f) {
    double err = nn::gradient_check(f, x);
    worst = std::max(worst, err);
    std::printf("%-12s max rel err %.3e\n", name, err);
  };
  run("matmul", [&](nn::Tape& t, nn::Tensor in) { return t.sum(t.matmul(in, t.constant(w))); });
  run("sigmoid", [&](nn::Tape& t, nn::Tensor in) { return t.sum(t.sigmoid(in)); });
  run("tanh", [&](nn::Tape& t, nn::Tensor in) { return t.sum(t.tanh(in)); });
  run("swish", [&](nn::Tape& t, nn::Tensor in) { return t.sum(t.swish(in)); });
  run("softmax", [&](nn::Tape& t, nn::Tensor in) {
    return t.sum(t.mul(t.softmax_rows(in), t.constant(mixer)));
  });
  nn::Array gain(1, 4, 1.0);
  run("rmsnorm", [&](nn::Tape& t, nn::Tensor in) {
    return t.sum(t.rmsnorm(in, t.constant(gain), 1e-6));
  });

  KnowledgeGraph g;
  for (int i = 0; i < 5; ++i) g.add_entity("e" + std::to_string(i));
  g.add_relation("r");
  g.add_relation("s");
  g.add_triple(0, 0, 1);
  g.add_triple(1, 1, 2);
  g.add_triple(2, 0, 3);
  g.add_triple(3, 1, 4);
  g.add_triple(4, 0, 0);
  g.finalize();
  ModelConfig mc;
  mc.hidden_dim = 8;
  mc.heads = 2;
  mc.head_dim = 4;
  mc.update_steps = 2;
  mc.walk_len = 4;
  mc.base_walks = 1;
  FlockModel model(mc, 7);
  Query q = Query::entity(0, 0);
  GraphView view(g);
  std::vector<WalkBatch> batches;
  for (int i = 0; i < mc.update_steps; ++i)
    batches.push_back(sample_walk_batch(view, q, 1, 4, Rng(40 + i)));
  auto loss_fn = [&](bool with_grad) {
    nn::Tape tape;
    nn::Tensor scores = model.forward_on_tape(tape, view, q, 1, Rng(0), &batches);
    nn::Tensor p_pos = tape.gather_rows(scores, {1});
    nn::Tensor p_neg = tape.gather_rows(scores, {3});
    nn::Tensor loss = adversarial_loss(tape, p_pos, p_neg, 1.0, 1e-7);
    if (with_grad) tape.backward(loss);
    return loss.value().data[0];
  };
  double e2e = nn::gradient_check_params(loss_fn, model.parameters());
  std::printf("%-12s max rel err %.3e\n", "end-to-end", e2e);
  worst = std::max(worst, e2e);
  std::printf("gradcheck %s\n", worst < 1e-4 ? "PASS" : "FAIL");
  return worst < 1e-4 ? kExitOk : kExitFailure;
}

int cmd_verify(const std::string& suite, const GlobalFlags& flags) {
  if (suite == "gradients") return cmd_gradcheck();

  if (suite == "invariance") {
    Rng rng(flags.seed == 0 ? 1 : flags.seed);
    int failures = 0;
    for (int i = 0; i < 100; ++i) {
      Rng sub = rng.substream(i);
      InvarianceCase c = random_invariance_case(sub);
      InvarianceReport report = check_deterministic_invariance(c);
      if (!report.passed) {
        ++failures;
        std::printf("case %3d FAIL: %s\n", i, report.failure.c_str());
      }
    }
    std::printf("deterministic invariance: %d/100 passed\n", 100 - failures);

    int done = 0, failed = 0;
    for (int i = 0; done < 20 && i < 200; ++i) {
      Rng sub = rng.substream(1000 + i);
      InvarianceCase c = random_invariance_case(sub);
      c.walk_len = 2;
      if (c.graph.num_entities() > 6) continue;
      ModelConfig mc;
      mc.hidden_dim = 8;
      mc.heads = 2;
      mc.head_dim = 4;
      mc.update_steps = 1;
      mc.walk_len = c.walk_len;
      mc.base_walks = 1;
      FlockModel model(mc, 3000 + i);
      DistributionalReport report = check_distributional_invariance(c, model);
      if (!report.feasible) continue;
      ++done;
      if (!report.distributions_equal || report.max_discrepancy >= 1e-9) {
        ++failed;
        std::printf("distributional case %d FAIL: discrepancy %.3e\n", i,
                    report.max_discrepancy);
      }
    }
    std::printf("distributional invariance: %d/%d passed\n", done - failed, done);
    return failures == 0 && failed == 0 ? kExitOk : kExitFailure;
  }

  if (suite == "scaling") {
    auto points = scaling_probe(32, 32, 2, 2, 5, flags.seed == 0 ? 11 : flags.seed);
    std::printf("axis,value,seconds\n");
    for (const auto& p : points)
      std::printf("%s,%d,%.4f\n", p.axis.c_str(), p.value, p.seconds);
    bool ok = true;
    for (const std::string axis : {"walks", "length", "passes"}) {
      std::vector<double> times;
      for (const auto& p : points)
        if (p.axis == axis) times.push_back(p.seconds);
      for (size_t i = 1; i < times.size(); ++i) {
        double ratio = times[i] / times[i - 1];
        std::printf("%s doubling ratio %.2f\n", axis.c_str(), ratio);
        ok = ok && ratio >= 1.5 && ratio <= 2.5;
      }
    }
    std::printf("scaling %s\n", ok ? "PASS" : "FAIL");
    return ok ? kExitOk : kExitFailure;
  }

  if (suite == "petals-structure") {
    auto instances = generate_benchmark(flags.seed);
    long checked = 0;
    for (const PetalsInstance& inst : instances) {
      if (inst.graph.num_entities() != inst.expected_entities() ||
          static_cast<int>(inst.graph.triples().size()) != inst.expected_edges()) {
        std::printf("structure FAIL on scheme %d\n", inst.params.scheme_id);
        return kExitFailure;
      }
      ceiling_certificate(inst);  // throws on any certificate failure
      auto [s1, s2] = invariant_baseline_scores(inst);
      if (s1 != s2) {
        std::printf("baseline tie FAIL on scheme %d\n", inst.params.scheme_id);
        return kExitFailure;
      }
      ++checked;
    }
    std::printf("petals-structure: %ld/220 instances verified\n", checked);
    return checked == 220 ? kExitOk : kExitFailure;
  }

  std::fprintf(stderr, "usage error: unknown suite '%s'\n", suite.c_str());
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-walk knowledge-graph model"};
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "global random seed")->capture_default_str();
  app.add_option("--threads", flags.threads, "worker threads (1 = bitwise reproducible)")
      ->capture_default_str();
  app.add_option("--log-level", flags.log_level, "debug|info|warn|error")
      ->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
  std::string config_path;
  std::vector<std::string> overrides;
  train_cmd->add_option("--config", config_path, "key = value config file")->required();
  train_cmd->add_option("--set", overrides, "override config entries (key=value)");

  auto* eval_cmd = app.add_subcommand("eval", "filtered-ranking evaluation");
  std::string checkpoint, dataset_dir, task = "entity", walks_arg = "auto", split = "test";
  std::string ranks_csv;
  int passes = 16;
  bool tail_only = false;
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--dataset_dir", dataset_dir)->required();
  eval_cmd->add_option("--task", task, "entity|relation")->capture_default_str();
  eval_cmd->add_option("--passes", passes, "ensemble size")->capture_default_str();
  eval_cmd->add_option("--walks", walks_arg, "base walk count or 'auto'")
      ->capture_default_str();
  eval_cmd->add_flag("--tail-only", tail_only, "skip head-side queries");
  eval_cmd->add_option("--split", split, "test|valid")->capture_default_str();
  eval_cmd->add_option("--ranks-csv", ranks_csv, "write per-query ranks here");

  auto* predict_cmd = app.add_subcommand("predict", "score candidates for one query");
  std::string graph_path, query_str;
  int pred_passes = 4, pred_walks = 0, top_k = 10;
  predict_cmd->add_option("--checkpoint", checkpoint)->required();
  predict_cmd->add_option("--graph", graph_path, "triple TSV")->required();
  predict_cmd->add_option("--query", query_str, "'head rel ?' or 'head ? tail'")->required();
  predict_cmd->add_option("--passes", pred_passes)->capture_default_str();
  predict_cmd->add_option("--walks", pred_walks, "0 = checkpoint default")
      ->capture_default_str();
  predict_cmd->add_option("--top", top_k)->capture_default_str();

  auto* petals_gen_cmd = app.add_subcommand("petals-gen", "generate the diagnostic benchmark");
  std::string out_dir;
  petals_gen_cmd->add_option("--out", out_dir)->required();

  auto* petals_eval_cmd =
      app.add_subcommand("petals-eval", "score a checkpoint on the diagnostic benchmark");
  std::string petals_dir;
  int petals_passes = 16, petals_walks = 0;
  petals_eval_cmd->add_option("--checkpoint", checkpoint)->required();
  petals_eval_cmd->add_option("--dir", petals_dir)->required();
  petals_eval_cmd->add_option("--passes", petals_passes)->capture_default_str();
  petals_eval_cmd->add_option("--walks", petals_walks, "0 = checkpoint default")
      ->capture_default_str();

  auto* walk_bench_cmd = app.add_subcommand("walk-bench", "edge-cover statistics per length");
  std::string lengths = "8,16,32,64,128", bench_out;
  int samples = 1000;
  walk_bench_cmd->add_option("--graph", graph_path, "triple TSV")->required();
  walk_bench_cmd->add_option("--length", lengths, "comma-separated walk lengths")
      ->capture_default_str();
  walk_bench_cmd->add_option("--samples", samples)->capture_default_str();
  walk_bench_cmd->add_option("--out", bench_out, "CSV path (default stdout)");

  auto* verify_cmd = app.add_subcommand("verify", "verification suites");
  std::string suite;
  verify_cmd->add_option("--suite", suite, "invariance|gradients|scaling|petals-structure")
      ->required();

  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference gradient checks");

  CLI11_PARSE(app, argc, argv);

  try {
    apply_log_level(flags.log_level);
    if (train_cmd->parsed()) {
      RunConfig cfg;
      cfg.load_file(config_path);
      for (const std::string& o : overrides) cfg.set_override(o);
      cfg.require_known_keys(kConfigKeys);
      return cmd_train(cfg, flags);
    }
    if (eval_cmd->parsed())
      return cmd_eval(checkpoint, dataset_dir, task, passes, walks_arg, tail_only, split,
                      ranks_csv, flags);
    if (predict_cmd->parsed())
      return cmd_predict(checkpoint, graph_path, query_str, pred_passes, pred_walks, top_k,
                         flags);
    if (petals_gen_cmd->parsed()) return cmd_petals_gen(out_dir, flags);
    if (petals_eval_cmd->parsed())
      return cmd_petals_eval(checkpoint, petals_dir, petals_passes, petals_walks, flags);
    if (walk_bench_cmd->parsed())
      return cmd_walk_bench(graph_path, lengths, samples, bench_out, flags);
    if (verify_cmd->parsed()) return cmd_verify(suite, flags);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck();
  } catch (const std::exception& e) {
    log_error(e.what());
    std::string what = e.what();
    bool usage = what.find("config") != std::string::npos &&
                 (what.find("cannot open") != std::string::npos ||
                  what.find("unknown keys") != std::string::npos);
    return usage ? kExitUsage : kExitFailure;
  }
  return kExitUsage;
}
