#include "flock/verify.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include "flock/stats.hpp"

namespace flock {

Isomorphism random_isomorphism(const KnowledgeGraph& g, Rng& rng) {
  Isomorphism iso;
  iso.node_map.resize(g.num_entities());
  iso.rel_map.resize(g.num_relations());
  for (int i = 0; i < g.num_entities(); ++i) iso.node_map[i] = i;
  for (int i = 0; i < g.num_relations(); ++i) iso.rel_map[i] = i;
  for (int i = g.num_entities() - 1; i > 0; --i)
    std::swap(iso.node_map[i], iso.node_map[rng.uniform_int(i + 1)]);
  for (int i = g.num_relations() - 1; i > 0; --i)
    std::swap(iso.rel_map[i], iso.rel_map[rng.uniform_int(i + 1)]);
  return iso;
}

KnowledgeGraph random_small_graph(Rng& rng, int num_entities, int num_relations,
                                  int extra_edges) {
  KnowledgeGraph g;
  for (int v = 0; v < num_entities; ++v) g.add_entity("e" + std::to_string(v));
  for (int r = 0; r < num_relations; ++r) g.add_relation("r" + std::to_string(r));
  for (int v = 1; v < num_entities; ++v)  // random spanning tree keeps it connected
    g.add_triple(rng.uniform_int(v), rng.uniform_int(num_relations), v);
  for (int e = 0; e < extra_edges; ++e)
    g.add_triple(rng.uniform_int(num_entities), rng.uniform_int(num_relations),
                 rng.uniform_int(num_entities));
  g.finalize();
  return g;
}

InvarianceCase random_invariance_case(Rng& rng) {
  InvarianceCase c;
  int entities = 4 + rng.uniform_int(5);  // 4..8
  int relations = 2 + rng.uniform_int(2);
  c.graph = random_small_graph(rng, entities, relations, rng.uniform_int(4));
  if (rng.uniform_int(2) == 0) {
    c.query = Query::entity(rng.uniform_int(entities), rng.uniform_int(relations));
  } else {
    c.query = Query::relation(rng.uniform_int(entities), rng.uniform_int(entities));
  }
  c.iso = random_isomorphism(c.graph, rng);
  c.walk_len = 2 + rng.uniform_int(2);  // 2..3
  return c;
}

namespace {

// Independent reference recorder: incremental first-seen maps instead of
// argmin rescans. Kept deliberately separate from the production code so
// recording defects show up as cross-implementation mismatches.
Record reference_record(const Walk& walk, const Query& q) {
  Record rec;
  int l = walk.length();
  std::map<int, int> node_first, rel_first;
  rec.node_anon.resize(l + 1);
  rec.rel_anon.resize(l + 1);
  rec.direction.resize(l + 1);
  rec.is_query_head.resize(l + 1);
  rec.is_query_rel.resize(l + 1);
  for (int s = 0; s <= l; ++s) {
    int node = walk.node_at(s);
    auto [nit, fresh] = node_first.try_emplace(node, s);
    rec.node_anon[s] = nit->second;
    bool head_hit = node == q.head;
    if (q.kind == QueryKind::kRelationPrediction) head_hit = head_hit || node == q.tail;
    rec.is_query_head[s] = head_hit ? 1 : 0;
    if (s == 0) {
      rec.rel_anon[0] = 0;
      rec.direction[0] = Direction::kNone;
      rec.is_query_rel[0] = 0;
      continue;
    }
    const WalkStep& st = walk.steps[s - 1];
    auto [rit, rfresh] = rel_first.try_emplace(st.rel, s);
    rec.rel_anon[s] = rit->second;
    rec.direction[s] = st.dir;
    rec.is_query_rel[s] =
        (q.kind == QueryKind::kEntityPrediction && st.rel == q.rel) ? 1 : 0;
  }
  return rec;
}

std::string describe_walk(const Walk& w) {
  std::string out = std::to_string(w.start);
  for (const WalkStep& s : w.steps)
    out += (s.dir == Direction::kInverse ? " <-r" : " -r") + std::to_string(s.rel) +
           (s.dir == Direction::kInverse ? "- " : "-> ") + std::to_string(s.node);
  return out;
}

// Proposal/confidence rows derived from a walk's record only, so they are
// identical for relabeled walks by construction.
void fake_proposals(const Record& rec, int dim, int heads, nn::Array& props, nn::Array& conf) {
  int rows = rec.length();
  props = nn::Array(rows, dim);
  conf = nn::Array(rows, heads);
  for (int s = 0; s < rows; ++s) {
    uint64_t h = Rng::mix(0x5eed ^ (static_cast<uint64_t>(rec.node_anon[s]) << 32) ^
                          (static_cast<uint64_t>(rec.rel_anon[s]) << 16) ^
                          (static_cast<uint64_t>(rec.direction[s]) << 8) ^
                          (rec.is_query_head[s] << 4) ^ rec.is_query_rel[s]);
    for (int j = 0; j < dim; ++j) {
      h = Rng::mix(h);
      props.at(s, j) = static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5;
    }
    for (int k = 0; k < heads; ++k) {
      h = Rng::mix(h);
      conf.at(s, k) = (static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5) * 2.0;
    }
  }
}

// Pools fake proposals for a set of walks; returns per-entity and
// per-relation update rows (zero when unvisited).
void pooled_updates(const std::vector<Walk>& walks, const Query& q, int num_entities,
                    int num_relations, nn::Array& delta_nodes, nn::Array& delta_rels) {
  const int dim = 8, heads = 2;
  int n_walks = static_cast<int>(walks.size());
  if (n_walks == 0) throw std::invalid_argument("pooled_updates: no walks");
  int positions = walks[0].length() + 1;
  nn::Array all_props(n_walks * positions, dim), all_conf(n_walks * positions, heads);
  std::vector<int> node_of_row(n_walks * positions), rel_of_row(n_walks * positions, -1);
  for (int w = 0; w < n_walks; ++w) {
    Record rec = make_record(walks[w], q);
    nn::Array props, conf;
    fake_proposals(rec, dim, heads, props, conf);
    for (int s = 0; s < positions; ++s) {
      int row = w * positions + s;  // canonical (walk, position) order
      for (int j = 0; j < dim; ++j) all_props.at(row, j) = props.at(s, j);
      for (int k = 0; k < heads; ++k) all_conf.at(row, k) = conf.at(s, k);
      node_of_row[row] = walks[w].node_at(s);
      if (s > 0) rel_of_row[row] = walks[w].steps[s - 1].rel;
    }
  }
  std::vector<std::vector<int>> node_segments(num_entities), rel_segments(num_relations);
  for (int row = 0; row < n_walks * positions; ++row) {
    node_segments[node_of_row[row]].push_back(row);
    if (rel_of_row[row] >= 0) rel_segments[rel_of_row[row]].push_back(row);
  }
  nn::Tape tape;
  delta_nodes = tape.segment_softmax_pool(tape.constant(all_props), tape.constant(all_conf),
                                          node_segments, heads)
                    .value();
  delta_rels = tape.segment_softmax_pool(tape.constant(all_props), tape.constant(all_conf),
                                         rel_segments, heads)
                   .value();
}

}  // namespace

InvarianceReport check_deterministic_invariance(const InvarianceCase& c,
                                                const RecordOptions& mutation) {
  InvarianceReport report;
  GraphView view(c.graph);
  auto dists = enumerate_walk_distribution(view, c.query, c.walk_len);
  Query mapped_query = apply_isomorphism(c.query, c.iso);

  std::vector<Walk> sample_walks;
  for (const auto& dist : dists) {
    for (const auto& [walk, prob] : dist.outcomes) {
      ++report.walks_checked;
      Record produced = make_record(walk, c.query, mutation);
      Record reference = reference_record(walk, c.query);
      if (produced != reference) {
        report.passed = false;
        report.failure = "recording mismatch vs reference on walk " + describe_walk(walk);
        return report;
      }
      Record relabeled = make_record(apply_isomorphism(walk, c.iso), mapped_query, mutation);
      if (produced != relabeled) {
        report.passed = false;
        report.failure = "recording changed under relabeling on walk " + describe_walk(walk);
        return report;
      }
      if (sample_walks.size() < 12) sample_walks.push_back(walk);
    }
  }

  // consensus: pooled updates of fixed proposals must commute with the
  // relabeling exactly
  std::vector<Walk> mapped_walks;
  for (const Walk& w : sample_walks) mapped_walks.push_back(apply_isomorphism(w, c.iso));
  nn::Array dn, dr, dn_mapped, dr_mapped;
  pooled_updates(sample_walks, c.query, c.graph.num_entities(), c.graph.num_relations(), dn,
                 dr);
  pooled_updates(mapped_walks, mapped_query, c.graph.num_entities(), c.graph.num_relations(),
                 dn_mapped, dr_mapped);
  for (int v = 0; v < c.graph.num_entities(); ++v)
    for (int j = 0; j < dn.cols; ++j)
      if (dn.at(v, j) != dn_mapped.at(c.iso.node_map[v], j)) {
        report.passed = false;
        report.failure = "consensus node update not equivariant at entity " + std::to_string(v);
        return report;
      }
  for (int r = 0; r < c.graph.num_relations(); ++r)
    for (int j = 0; j < dr.cols; ++j)
      if (dr.at(r, j) != dr_mapped.at(c.iso.rel_map[r], j)) {
        report.passed = false;
        report.failure = "consensus relation update not equivariant at relation " +
                         std::to_string(r);
        return report;
      }
  return report;
}

DistributionalReport check_distributional_invariance(const InvarianceCase& c, FlockModel& model,
                                                     long budget) {
  if (model.config().update_steps != 1)
    throw std::invalid_argument(
        "check_distributional_invariance: model must run a single update step");
  DistributionalReport report;
  KnowledgeGraph mapped_graph = apply_isomorphism(c.graph, c.iso);
  Query mapped_query = apply_isomorphism(c.query, c.iso);
  GraphView view(c.graph), mapped_view(mapped_graph);

  auto dists = enumerate_walk_distribution(view, c.query, c.walk_len, budget);
  auto mapped_dists = enumerate_walk_distribution(mapped_view, mapped_query, c.walk_len, budget);

  // exact walk-law invariance: the relabeled distribution must coincide
  for (size_t d = 0; d < dists.size(); ++d) {
    std::vector<std::pair<Walk, Rational>> pushed;
    for (const auto& [walk, p] : dists[d].outcomes)
      pushed.push_back({apply_isomorphism(walk, c.iso), p});
    std::sort(pushed.begin(), pushed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (pushed.size() != mapped_dists[d].outcomes.size()) {
      report.distributions_equal = false;
    } else {
      for (size_t i = 0; i < pushed.size(); ++i)
        if (!(pushed[i].first == mapped_dists[d].outcomes[i].first) ||
            !(pushed[i].second == mapped_dists[d].outcomes[i].second))
          report.distributions_equal = false;
    }
  }

  long tuple_count = 1;
  for (const auto& dist : dists) {
    tuple_count *= static_cast<long>(dist.outcomes.size());
    if (tuple_count > budget || tuple_count <= 0) {
      report.feasible = false;
      return report;
    }
  }
  report.tuples = tuple_count;

  int candidates = c.query.kind == QueryKind::kEntityPrediction ? c.graph.num_entities()
                                                                : c.graph.num_relations();
  auto expected_scores = [&](const GraphView& g, const Query& q,
                             const std::vector<WalkDistribution>& scenario_dists) {
    std::vector<double> expectation(candidates, 0.0);
    std::vector<StartScenario> tags = batch_scenarios(q, 1);
    std::vector<size_t> index(scenario_dists.size(), 0);
    while (true) {
      WalkBatch batch;
      batch.scenario_tags = tags;
      Rational p(1);
      for (size_t d = 0; d < scenario_dists.size(); ++d) {
        batch.walks.push_back(scenario_dists[d].outcomes[index[d]].first);
        p = p * scenario_dists[d].outcomes[index[d]].second;
      }
      std::vector<WalkBatch> fixed = {batch};
      nn::Tape tape;
      nn::Array scores = model.forward_on_tape(tape, g, q, 1, Rng(0), &fixed).value();
      double pd = p.to_double();
      for (int t = 0; t < candidates; ++t) expectation[t] += pd * scores.data[t];
      size_t d = 0;
      while (d < index.size() && ++index[d] == scenario_dists[d].outcomes.size()) {
        index[d] = 0;
        ++d;
      }
      if (d == index.size()) break;
    }
    return expectation;
  };

  std::vector<double> eg = expected_scores(view, c.query, dists);
  std::vector<double> eh = expected_scores(mapped_view, mapped_query, mapped_dists);
  for (int t = 0; t < candidates; ++t) {
    int image = c.query.kind == QueryKind::kEntityPrediction ? c.iso.node_map[t]
                                                             : c.iso.rel_map[t];
    report.max_discrepancy = std::max(report.max_discrepancy, std::fabs(eg[t] - eh[image]));
  }
  return report;
}

std::vector<ScalingPoint> scaling_probe(int base_walks, int base_length, int base_passes,
                                        int doublings, int reps, uint64_t seed) {
  Rng rng(seed);
  KnowledgeGraph g = random_small_graph(rng, 60, 3, 120);
  GraphView view(g);
  Query q = Query::entity(0, 0);

  auto timed_forward = [&](int walks, int length, int passes) {
    ModelConfig cfg;
    cfg.hidden_dim = 32;
    cfg.heads = 4;
    cfg.head_dim = 8;
    cfg.update_steps = 2;
    cfg.walk_len = length;
    cfg.base_walks = walks;
    cfg.max_passes = 1024;
    FlockModel model(cfg, seed);
    model.ensemble(view, q, passes, walks, rng.substream(999));  // warm-up, untimed
    std::vector<double> times;
    for (int rep = 0; rep < reps; ++rep) {
      auto start = std::chrono::steady_clock::now();
      model.ensemble(view, q, passes, walks, rng.substream(rep));
      std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      times.push_back(elapsed.count());
    }
    return median(times);
  };

  std::vector<ScalingPoint> points;
  for (int d = 0; d <= doublings; ++d) {
    int factor = 1 << d;
    points.push_back({"walks", base_walks * factor,
                      timed_forward(base_walks * factor, base_length, base_passes)});
    points.push_back({"length", base_length * factor,
                      timed_forward(base_walks, base_length * factor, base_passes)});
    points.push_back({"passes", base_passes * factor,
                      timed_forward(base_walks, base_length, base_passes * factor)});
  }
  return points;
}

}  // namespace flock
