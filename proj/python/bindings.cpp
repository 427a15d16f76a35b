#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flock/checkpoint.hpp"
#include "flock/eval.hpp"
#include "flock/petals.hpp"
#include "flock/record.hpp"
#include "flock/train.hpp"
#include "flock/verify.hpp"
#include "flock/walk.hpp"

namespace py = pybind11;
using namespace flock;

namespace {

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::kForward: return "forward";
    case Direction::kInverse: return "inverse";
    case Direction::kNone: return "none";
  }
  return "?";
}

const char* scenario_name(StartScenario s) {
  switch (s) {
    case StartScenario::kQueryHead: return "query-head";
    case StartScenario::kQueryRelation: return "query-relation";
    case StartScenario::kRandom: return "random";
    case StartScenario::kQueryTail: return "query-tail";
  }
  return "?";
}

std::vector<double> scores_to_vector(const nn::Array& a) {
  return std::vector<double>(a.data.begin(), a.data.end());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "random-walk knowledge-graph model (C++ core)";

  py::class_<Triple>(m, "Triple")
      .def(py::init<int, int, int>(), py::arg("head"), py::arg("rel"), py::arg("tail"))
      .def_readonly("head", &Triple::head)
      .def_readonly("rel", &Triple::rel)
      .def_readonly("tail", &Triple::tail)
      .def("__repr__", [](const Triple& t) {
        return "Triple(" + std::to_string(t.head) + ", " + std::to_string(t.rel) + ", " +
               std::to_string(t.tail) + ")";
      });

  py::class_<KnowledgeGraph>(m, "KnowledgeGraph")
      .def(py::init<>())
      .def_static("load", &load_triples, py::arg("path"), py::arg("dedup") = true)
      .def("save", [](const KnowledgeGraph& g, const std::string& path) {
        save_triples(g, path);
      })
      .def("add_entity", &KnowledgeGraph::add_entity)
      .def("add_relation", &KnowledgeGraph::add_relation)
      .def("add_triple", &KnowledgeGraph::add_triple)
      .def("finalize", &KnowledgeGraph::finalize)
      .def_property_readonly("num_entities", &KnowledgeGraph::num_entities)
      .def_property_readonly("num_relations", &KnowledgeGraph::num_relations)
      .def_property_readonly("entity_names", &KnowledgeGraph::entity_names)
      .def_property_readonly("relation_names", &KnowledgeGraph::relation_names)
      .def("entity_id", &KnowledgeGraph::entity_id)
      .def("relation_id", &KnowledgeGraph::relation_id)
      .def("triples", &KnowledgeGraph::triples)
      .def("degree", &KnowledgeGraph::degree)
      .def("neighbors",
           [](const KnowledgeGraph& g, int v) {
             auto span = g.neighbors(v);
             return std::vector<int>(span.begin(), span.end());
           })
      .def("edges_between",
           [](const KnowledgeGraph& g, int v, int w) {
             std::vector<std::pair<int, std::string>> out;
             for (const EdgeRef& e : g.edges_between(v, w))
               out.push_back({e.rel, direction_name(e.dir)});
             return out;
           })
      .def("reversed", &KnowledgeGraph::reversed);

  py::class_<Isomorphism>(m, "Isomorphism")
      .def(py::init([](std::vector<int> nodes, std::vector<int> rels) {
             Isomorphism iso{std::move(nodes), std::move(rels)};
             iso.validate(static_cast<int>(iso.node_map.size()),
                          static_cast<int>(iso.rel_map.size()));
             return iso;
           }),
           py::arg("node_map"), py::arg("rel_map"))
      .def_readonly("node_map", &Isomorphism::node_map)
      .def_readonly("rel_map", &Isomorphism::rel_map)
      .def("inverse", &Isomorphism::inverse);

  m.def("apply_isomorphism",
        py::overload_cast<const KnowledgeGraph&, const Isomorphism&>(&apply_isomorphism));
  m.def("random_isomorphism", [](const KnowledgeGraph& g, uint64_t seed) {
    Rng rng(seed);
    return random_isomorphism(g, rng);
  });

  py::class_<Query>(m, "Query")
      .def_static("entity", &Query::entity, py::arg("head"), py::arg("rel"))
      .def_static("relation", &Query::relation, py::arg("head"), py::arg("tail"))
      .def_readonly("head", &Query::head)
      .def_readonly("rel", &Query::rel)
      .def_readonly("tail", &Query::tail)
      .def_property_readonly("kind", [](const Query& q) {
        return q.kind == QueryKind::kEntityPrediction ? "entity" : "relation";
      });

  py::class_<WalkStep>(m, "WalkStep")
      .def_readonly("rel", &WalkStep::rel)
      .def_readonly("node", &WalkStep::node)
      .def_property_readonly("direction",
                             [](const WalkStep& s) { return direction_name(s.dir); });

  py::class_<Walk>(m, "Walk")
      .def_readonly("start", &Walk::start)
      .def_readonly("steps", &Walk::steps)
      .def("node_at", &Walk::node_at)
      .def("__len__", &Walk::length);

  py::class_<WalkBatch>(m, "WalkBatch")
      .def_readonly("walks", &WalkBatch::walks)
      .def_property_readonly("scenarios", [](const WalkBatch& b) {
        std::vector<std::string> out;
        for (StartScenario s : b.scenario_tags) out.push_back(scenario_name(s));
        return out;
      });

  m.def(
      "sample_walk_batch",
      [](const KnowledgeGraph& g, const Query& q, int n, int length, uint64_t seed) {
        return sample_walk_batch(GraphView(g), q, n, length, Rng(seed));
      },
      py::arg("graph"), py::arg("query"), py::arg("n"), py::arg("length"), py::arg("seed"));

  py::class_<Record>(m, "Record")
      .def_readonly("node_anon", &Record::node_anon)
      .def_readonly("rel_anon", &Record::rel_anon)
      .def_readonly("is_query_head", &Record::is_query_head)
      .def_readonly("is_query_rel", &Record::is_query_rel)
      .def_property_readonly("directions",
                             [](const Record& r) {
                               std::vector<std::string> out;
                               for (Direction d : r.direction) out.push_back(direction_name(d));
                               return out;
                             })
      .def("__str__", &format_record)
      .def("__len__", &Record::length)
      .def("__eq__", [](const Record& a, const Record& b) { return a == b; });

  m.def("make_record",
        [](const Walk& w, const Query& q) { return make_record(w, q); });
  m.def("anon_translate_check", &anon_translate_check);

  m.def(
      "adapt_walk_count",
      [](int n_train, double mean_train_entities, double mean_train_edges, long num_entities,
         long num_edges, int clamp_min, int clamp_max) {
        WalkCountPolicy policy{n_train, mean_train_entities, mean_train_edges, clamp_min,
                               clamp_max};
        return adapt_walk_count(policy, num_entities, num_edges);
      },
      py::arg("n_train"), py::arg("mean_train_entities"), py::arg("mean_train_edges"),
      py::arg("num_entities"), py::arg("num_edges"), py::arg("clamp_min") = 16,
      py::arg("clamp_max") = 512);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("hidden_dim", &ModelConfig::hidden_dim)
      .def_readwrite("heads", &ModelConfig::heads)
      .def_readwrite("head_dim", &ModelConfig::head_dim)
      .def_readwrite("update_steps", &ModelConfig::update_steps)
      .def_readwrite("walk_len", &ModelConfig::walk_len)
      .def_readwrite("base_walks", &ModelConfig::base_walks)
      .def_readwrite("max_passes", &ModelConfig::max_passes)
      .def_readwrite("tie_update_weights", &ModelConfig::tie_update_weights)
      .def_readwrite("resample_walks", &ModelConfig::resample_walks)
      .def_readwrite("init_std", &ModelConfig::init_std);

  py::class_<FlockModel>(m, "FlockModel")
      .def(py::init<ModelConfig, uint64_t>(), py::arg("config"), py::arg("param_seed"))
      .def_property_readonly("config", &FlockModel::config)
      .def(
          "forward",
          [](FlockModel& model, const KnowledgeGraph& g, const Query& q, int walks,
             uint64_t seed) { return scores_to_vector(model.forward(GraphView(g), q, walks, Rng(seed))); },
          py::arg("graph"), py::arg("query"), py::arg("walks"), py::arg("seed"))
      .def(
          "ensemble",
          [](FlockModel& model, const KnowledgeGraph& g, const Query& q, int passes, int walks,
             uint64_t seed) {
            return scores_to_vector(model.ensemble(GraphView(g), q, passes, walks, Rng(seed)));
          },
          py::arg("graph"), py::arg("query"), py::arg("passes"), py::arg("walks"),
          py::arg("seed"))
      .def("save", [](FlockModel& model, const std::string& path) {
        save_checkpoint(path, model);
      })
      .def_static("load", [](const std::string& path) {
        return std::move(load_checkpoint(path).model);
      });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("task", &TrainConfig::task)
      .def_readwrite("negatives", &TrainConfig::negatives)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("adv_temp", &TrainConfig::adv_temp)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("steps", &TrainConfig::steps)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("val_every", &TrainConfig::val_every)
      .def_readwrite("mask_query_edges", &TrainConfig::mask_query_edges)
      .def_readwrite("filter_negatives", &TrainConfig::filter_negatives);

  m.def(
      "train_kg",
      [](FlockModel& model, const KnowledgeGraph& context, const TrainConfig& cfg,
         const std::string& out_dir) {
        KgTripleDataset data(context, context.triples(), cfg.task);
        TrainResult result = train(model, data, cfg, {}, out_dir);
        py::dict out;
        out["final_loss"] = result.final_loss;
        out["checkpoint"] = result.checkpoint_path;
        return out;
      },
      py::arg("model"), py::arg("context"), py::arg("config"), py::arg("out_dir"));

  py::class_<PetalsInstance>(m, "PetalsInstance")
      .def_readonly("graph", &PetalsInstance::graph)
      .def_readonly("query", &PetalsInstance::query)
      .def_readonly("true_target", &PetalsInstance::true_target)
      .def_readonly("false_target", &PetalsInstance::false_target)
      .def_readonly("stem_index", &PetalsInstance::stem_index)
      .def_readonly("target_petal", &PetalsInstance::target_petal)
      .def_readonly("target_depth", &PetalsInstance::target_depth)
      .def_property_readonly("scheme_id",
                             [](const PetalsInstance& i) { return i.params.scheme_id; })
      .def_property_readonly("petal_len",
                             [](const PetalsInstance& i) { return i.params.petal_len; })
      .def_property_readonly("stem_len",
                             [](const PetalsInstance& i) { return i.params.stem_len; })
      .def_property_readonly("expected_entities", &PetalsInstance::expected_entities)
      .def_property_readonly("expected_edges", &PetalsInstance::expected_edges);

  m.def("generate_petals_benchmark", &generate_benchmark, py::arg("seed"));
  m.def("save_petals_benchmark", &save_petals_benchmark);
  m.def("load_petals_benchmark", &load_petals_benchmark);
  m.def("petal_automorphism", &petal_automorphism);
  m.def("verify_ceiling_certificate",
        [](const PetalsInstance& inst) { verify_certificate(inst, ceiling_certificate(inst)); });
  m.def("invariant_baseline_scores", &invariant_baseline_scores);
  m.def("petals_accuracy", &petals_accuracy);
  m.def("petals_expected_accuracy", &petals_expected_accuracy);

  m.def("filtered_rank", &filtered_rank, py::arg("scores"), py::arg("true_idx"),
        py::arg("filtered"));
  m.def(
      "evaluate",
      [](FlockModel& model, const KnowledgeGraph& context, const std::vector<Triple>& eval_triples,
         const std::vector<Triple>& filter_triples, const std::string& task, int passes,
         int walks, bool tail_only, uint64_t seed, int threads) {
        FilterIndex filter;
        filter.add(filter_triples);
        EvalOptions options;
        options.passes = passes;
        options.walks = walks;
        options.tail_only = tail_only;
        options.seed = seed;
        options.threads = threads;
        MetricReport report =
            task == "relation"
                ? evaluate_relation(model, context, eval_triples, filter, options)
                : evaluate_entity(model, context, eval_triples, filter, options);
        py::dict out;
        out["mrr"] = report.mrr;
        out["count"] = report.count;
        py::dict hits;
        for (auto& [k, v] : report.hits_at) hits[py::int_(k)] = v;
        out["hits_at"] = hits;
        return out;
      },
      py::arg("model"), py::arg("context"), py::arg("eval_triples"), py::arg("filter_triples"),
      py::arg("task") = "entity", py::arg("passes") = 4, py::arg("walks") = 16,
      py::arg("tail_only") = false, py::arg("seed") = 0, py::arg("threads") = 1);
}
