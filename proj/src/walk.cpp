#include "flock/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flock/log.hpp"

namespace flock {

Walk apply_isomorphism(const Walk& w, const Isomorphism& iso) {
  Walk out;
  out.start = iso.node_map[w.start];
  out.steps.reserve(w.steps.size());
  for (const WalkStep& s : w.steps)
    out.steps.push_back({iso.rel_map[s.rel], s.dir, iso.node_map[s.node]});
  return out;
}

std::vector<StartScenario> batch_scenarios(const Query& q, int n) {
  std::vector<StartScenario> scenarios;
  scenarios.reserve(4 * static_cast<size_t>(n));
  auto block = [&](StartScenario s) {
    for (int i = 0; i < n; ++i) scenarios.push_back(s);
  };
  block(StartScenario::kQueryHead);
  block(StartScenario::kQueryRelation);
  block(StartScenario::kRandom);
  if (q.kind == QueryKind::kRelationPrediction) block(StartScenario::kQueryTail);
  return scenarios;
}

WalkStep sample_step(const GraphView& g, int prev, int cur, Rng& rng) {
  int deg = g.degree(cur);
  if (deg == 0)
    throw std::runtime_error("walk dead end: entity " + std::to_string(cur) +
                             " has no traversable edges");
  int next;
  if (prev < 0) {
    next = g.nth_neighbor(cur, -1, rng.uniform_int(deg));
  } else {
    bool prev_adjacent = g.count_edges_between(cur, prev) > 0;
    int candidates = deg - (prev_adjacent ? 1 : 0);
    if (candidates == 0) {
      next = prev;  // forced return at a degree-one node
    } else {
      next = g.nth_neighbor(cur, prev, rng.uniform_int(candidates));
    }
  }
  auto edges = g.edges_between(cur, next);
  EdgeRef e = edges[rng.uniform_int(static_cast<int>(edges.size()))];
  return {e.rel, e.dir, next};
}

namespace {

bool isolated(const GraphView& g, int v) { return g.degree(v) == 0; }

// Uniform start over non-isolated entities, then a uniform first step.
WalkStart random_start(const GraphView& g, Rng& rng) {
  int v_count = g.num_entities();
  std::vector<int> candidates;
  candidates.reserve(v_count);
  for (int v = 0; v < v_count; ++v)
    if (!isolated(g, v)) candidates.push_back(v);
  if (candidates.empty()) throw std::runtime_error("walk start: graph has no edges");
  int v0 = candidates[rng.uniform_int(static_cast<int>(candidates.size()))];
  return {v0, sample_step(g, -1, v0, rng)};
}

// All stored occurrences of relation r, as (head, tail) pairs in triple order.
std::vector<std::pair<int, int>> relation_occurrences(const GraphView& g, int r) {
  std::vector<std::pair<int, int>> out;
  for (const Triple& t : g.graph().triples()) {
    if (t.rel != r) continue;
    if (g.masks_pair(t.head, t.tail)) continue;
    out.push_back({t.head, t.tail});
  }
  return out;
}

}  // namespace

WalkStart sample_start(const GraphView& g, const Query& q, StartScenario scenario, Rng& rng) {
  switch (scenario) {
    case StartScenario::kQueryHead:
    case StartScenario::kQueryTail: {
      int v0 = scenario == StartScenario::kQueryHead ? q.head : q.tail;
      if (scenario == StartScenario::kQueryTail && q.kind != QueryKind::kRelationPrediction)
        throw std::invalid_argument("query-tail scenario requires a relation query");
      if (v0 < 0 || v0 >= g.num_entities())
        throw std::invalid_argument("walk start: query endpoint out of range");
      if (isolated(g, v0)) {
        log_warn("walk start: query endpoint " + std::to_string(v0) +
                 " is isolated, falling back to a random start");
        return random_start(g, rng);
      }
      return {v0, sample_step(g, -1, v0, rng)};
    }
    case StartScenario::kQueryRelation: {
      // Entity queries fix the first relation to the queried one. Relation
      // queries have no query relation, so a uniformly random (non-empty)
      // relation takes its place.
      int rel;
      if (q.kind == QueryKind::kEntityPrediction) {
        rel = q.rel;
      } else {
        std::vector<int> nonempty;
        for (int r = 0; r < g.num_relations(); ++r)
          if (!relation_occurrences(g, r).empty()) nonempty.push_back(r);
        if (nonempty.empty()) return random_start(g, rng);
        rel = nonempty[rng.uniform_int(static_cast<int>(nonempty.size()))];
      }
      auto occurrences = relation_occurrences(g, rel);
      if (occurrences.empty()) {
        log_warn("walk start: query relation " + std::to_string(rel) +
                 " has no edges, falling back to a random start");
        return random_start(g, rng);
      }
      auto [h, t] = occurrences[rng.uniform_int(static_cast<int>(occurrences.size()))];
      return {h, WalkStep{rel, Direction::kForward, t}};
    }
    case StartScenario::kRandom:
      return random_start(g, rng);
  }
  throw std::logic_error("unknown start scenario");
}

Walk sample_walk(const GraphView& g, const Query& q, StartScenario scenario, int length,
                 Rng& rng) {
  if (length < 1) throw std::invalid_argument("sample_walk: length must be >= 1");
  WalkStart start = sample_start(g, q, scenario, rng);
  Walk walk;
  walk.start = start.start;
  walk.steps.reserve(length);
  walk.steps.push_back(start.first);
  int prev = walk.start;
  int cur = start.first.node;
  for (int s = 1; s < length; ++s) {
    WalkStep step = sample_step(g, prev, cur, rng);
    walk.steps.push_back(step);
    prev = cur;
    cur = step.node;
  }
  return walk;
}

WalkBatch sample_walk_batch(const GraphView& g, const Query& q, int n, int length,
                            const Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_walk_batch: n must be >= 1");
  WalkBatch batch;
  batch.scenario_tags = batch_scenarios(q, n);
  batch.walks.resize(batch.scenario_tags.size());
  for (size_t j = 0; j < batch.walks.size(); ++j) {
    Rng walk_rng = rng.substream(j);
    batch.walks[j] = sample_walk(g, q, batch.scenario_tags[j], length, walk_rng);
  }
  return batch;
}

int adapt_walk_count(const WalkCountPolicy& policy, long num_entities, long num_edges) {
  if (policy.n_train <= 0 || policy.mean_train_entities <= 0.0 ||
      policy.mean_train_edges <= 0.0 || num_entities <= 0 || num_edges <= 0)
    throw std::invalid_argument("adapt_walk_count: all counts must be positive");
  if (policy.clamp_min > policy.clamp_max)
    throw std::invalid_argument("adapt_walk_count: clamp_min > clamp_max");
  double a = static_cast<double>(num_entities) / policy.mean_train_entities;
  double b = static_cast<double>(num_edges) / policy.mean_train_edges;
  double harmonic = 2.0 * a * b / (a + b);
  double raw = policy.n_train * harmonic;
  // Nearest power of two in linear distance, ties rounding up.
  int best = policy.clamp_min;
  double best_dist = -1.0;
  for (int e = 0; e < 62; ++e) {
    double p = std::ldexp(1.0, e);
    double dist = std::fabs(raw - p);
    if (best_dist < 0.0 || dist < best_dist || (dist == best_dist && p > best)) {
      best_dist = dist;
      best = static_cast<int>(p);
    }
    if (p > raw && e > 0) break;  // distances only grow past the bracketing power
  }
  return std::clamp(best, policy.clamp_min, policy.clamp_max);
}

namespace {

struct Enumerator {
  const GraphView& g;
  long max_outcomes;
  long emitted = 0;
  std::vector<std::pair<Walk, Rational>> out;

  void check_budget() {
    if (++emitted > max_outcomes)
      throw std::runtime_error("enumerate_walk_distribution: outcome budget exceeded (" +
                               std::to_string(max_outcomes) + ")");
  }

  // Expands every continuation of `walk` (currently at `cur`, arrived from
  // `prev`) for the remaining steps, multiplying probabilities.
  void extend(Walk& walk, int prev, int cur, int remaining, Rational p) {
    if (remaining == 0) {
      check_budget();
      out.push_back({walk, p});
      return;
    }
    int deg = g.degree(cur);
    if (deg == 0)
      throw std::runtime_error("enumerate_walk_distribution: dead end at entity " +
                               std::to_string(cur));
    bool prev_adjacent = prev >= 0 && g.count_edges_between(cur, prev) > 0;
    int candidates = prev_adjacent ? deg - 1 : deg;
    auto expand_to = [&](int next, Rational p_node) {
      auto edges = g.edges_between(cur, next);
      Rational p_edge(1, static_cast<int64_t>(edges.size()));
      for (const EdgeRef& e : edges) {
        walk.steps.push_back({e.rel, e.dir, next});
        extend(walk, cur, next, remaining - 1, p * p_node * p_edge);
        walk.steps.pop_back();
      }
    };
    if (candidates == 0) {
      expand_to(prev, Rational(1));  // forced return
      return;
    }
    Rational p_node(1, candidates);
    for (int w : g.neighbors(cur)) {
      if (w == prev) continue;
      expand_to(w, p_node);
    }
  }
};

}  // namespace

std::vector<WalkDistribution> enumerate_walk_distribution(const GraphView& g, const Query& q,
                                                          int length, long max_outcomes) {
  if (length < 1) throw std::invalid_argument("enumerate_walk_distribution: length >= 1");
  std::vector<StartScenario> scenarios = {StartScenario::kQueryHead,
                                          StartScenario::kQueryRelation, StartScenario::kRandom};
  if (q.kind == QueryKind::kRelationPrediction)
    scenarios = {StartScenario::kQueryHead, StartScenario::kQueryRelation,
                 StartScenario::kRandom, StartScenario::kQueryTail};

  std::vector<WalkDistribution> result;
  for (StartScenario scenario : scenarios) {
    Enumerator en{g, max_outcomes};
    auto start_from = [&](int v0, Rational p0) {
      // First step: uniform neighbor (no exclusion), then uniform edge.
      Walk walk;
      walk.start = v0;
      int deg = g.degree(v0);
      if (deg == 0)
        throw std::runtime_error("enumerate_walk_distribution: start entity " +
                                 std::to_string(v0) + " is isolated");
      Rational p_node(1, deg);
      for (int w : g.neighbors(v0)) {
        auto edges = g.edges_between(v0, w);
        Rational p_edge(1, static_cast<int64_t>(edges.size()));
        for (const EdgeRef& e : edges) {
          walk.steps.push_back({e.rel, e.dir, w});
          en.extend(walk, v0, w, length - 1, p0 * p_node * p_edge);
          walk.steps.pop_back();
        }
      }
    };
    auto random_scenario = [&] {
      std::vector<int> candidates;
      for (int v = 0; v < g.num_entities(); ++v)
        if (g.degree(v) > 0) candidates.push_back(v);
      if (candidates.empty())
        throw std::runtime_error("enumerate_walk_distribution: graph has no edges");
      Rational p0(1, static_cast<int64_t>(candidates.size()));
      for (int v0 : candidates) start_from(v0, p0);
    };
    switch (scenario) {
      case StartScenario::kQueryHead:
      case StartScenario::kQueryTail: {
        int v0 = scenario == StartScenario::kQueryHead ? q.head : q.tail;
        if (g.degree(v0) == 0) {
          random_scenario();  // sampling falls back to a random start
        } else {
          start_from(v0, Rational(1));
        }
        break;
      }
      case StartScenario::kQueryRelation: {
        auto occurrences_of = [&](int rel) {
          std::vector<std::pair<int, int>> occ;
          for (const Triple& t : g.graph().triples())
            if (t.rel == rel && !g.masks_pair(t.head, t.tail)) occ.push_back({t.head, t.tail});
          return occ;
        };
        auto expand_relation = [&](int rel, Rational p_rel) {
          auto occ = occurrences_of(rel);
          Rational p0 = p_rel * Rational(1, static_cast<int64_t>(occ.size()));
          for (auto [h, t] : occ) {
            Walk walk;
            walk.start = h;
            walk.steps.push_back({rel, Direction::kForward, t});
            en.extend(walk, h, t, length - 1, p0);
            walk.steps.pop_back();
          }
        };
        if (q.kind == QueryKind::kEntityPrediction) {
          if (occurrences_of(q.rel).empty()) {
            random_scenario();
          } else {
            expand_relation(q.rel, Rational(1));
          }
        } else {
          std::vector<int> nonempty;
          for (int r = 0; r < g.num_relations(); ++r)
            if (!occurrences_of(r).empty()) nonempty.push_back(r);
          if (nonempty.empty()) {
            random_scenario();
          } else {
            Rational p_rel(1, static_cast<int64_t>(nonempty.size()));
            for (int r : nonempty) expand_relation(r, p_rel);
          }
        }
        break;
      }
      case StartScenario::kRandom:
        random_scenario();
        break;
    }
    // Merge duplicate continuations reached along different expansion paths
    // (parallel edges make the same walk appear once per edge choice, which
    // is already distinct by rel/dir; merging is still needed for forced
    // returns that coincide with regular transitions -- keep it exact).
    std::sort(en.out.begin(), en.out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    WalkDistribution dist{scenario, {}};
    for (auto& [walk, p] : en.out) {
      if (!dist.outcomes.empty() && dist.outcomes.back().first == walk) {
        dist.outcomes.back().second = dist.outcomes.back().second + p;
      } else {
        dist.outcomes.push_back({std::move(walk), p});
      }
    }
    result.push_back(std::move(dist));
  }
  return result;
}

CoverStats measure_edge_cover(const KnowledgeGraph& g, int length, int samples, const Rng& rng) {
  if (samples < 1) throw std::invalid_argument("measure_edge_cover: samples >= 1");
  GraphView view(g);
  size_t edge_count = g.triples().size();
  // Edge identity = index into the triple list; recover it by matching
  // (node pair, rel) against stored triples, counting multiplicity slots.
  long covered = 0;
  double steps_sum = 0.0;
  Query dummy = Query::entity(0, 0);
  for (int i = 0; i < samples; ++i) {
    Rng walk_rng = rng.substream(i);
    Walk w = sample_walk(view, dummy, StartScenario::kRandom, length, walk_rng);
    std::vector<bool> seen(edge_count, false);
    size_t seen_count = 0;
    int prev = w.start;
    int covered_at = -1;
    for (int s = 0; s < w.length(); ++s) {
      const WalkStep& st = w.steps[s];
      int head = st.dir == Direction::kForward ? prev : st.node;
      int tail = st.dir == Direction::kForward ? st.node : prev;
      for (size_t e = 0; e < edge_count; ++e) {
        const Triple& t = g.triples()[e];
        if (!seen[e] && t.head == head && t.tail == tail && t.rel == st.rel) {
          seen[e] = true;
          ++seen_count;
          break;  // one multiplicity slot per traversal
        }
      }
      if (seen_count == edge_count) {
        covered_at = s + 1;
        break;
      }
      prev = st.node;
    }
    if (covered_at > 0) {
      ++covered;
      steps_sum += covered_at;
    }
  }
  CoverStats stats;
  stats.length = length;
  stats.cover_fraction = static_cast<double>(covered) / samples;
  stats.mean_steps_to_cover = covered > 0 ? steps_sum / covered : 0.0;
  return stats;
}

}  // namespace flock
