#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "flock/model.hpp"

namespace flock {

// Known-true completions across train+valid+test, for filtered ranking.
class FilterIndex {
 public:
  void add(const std::vector<Triple>& triples);

  // True tails of (h, r), true heads of (r, t), true relations of (h, t).
  const std::vector<int>& tails(int head, int rel) const;
  const std::vector<int>& heads(int rel, int tail) const;
  const std::vector<int>& relations(int head, int tail) const;

 private:
  static uint64_t key(int a, int b) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
           static_cast<uint32_t>(b);
  }
  std::unordered_map<uint64_t, std::vector<int>> tails_, heads_, rels_;
  std::vector<int> empty_;
};

// Rank of the true candidate after removing filtered candidates, with
// exact ties resolved to the mean rank: 1 + #{strictly greater} + ties/2.
// true_idx must not itself be filtered.
double filtered_rank(const std::vector<double>& scores, int true_idx,
                     const std::vector<int>& filtered);

struct MetricReport {
  double mrr = 0.0;
  std::map<int, double> hits_at;
  long count = 0;
};

struct PerQueryRank {
  std::string query;
  double rank = 0.0;
  int candidates = 0;  // after filtering
};

struct EvalOptions {
  int passes = 16;
  int walks = 0;  // 0 = adapt from the policy below
  WalkCountPolicy policy;
  bool tail_only = false;
  int threads = 1;
  uint64_t seed = 0;
  std::vector<int> hits_ks = {1, 3, 10};
};

// Entity prediction: each triple is scored as a tail query (h, r, ?) and,
// unless tail_only, as a head query (t, r, ?) against the reversed context
// graph. Queries are independent and run in parallel deterministically
// (query i uses seed substream i).
MetricReport evaluate_entity(FlockModel& model, const KnowledgeGraph& context,
                             const std::vector<Triple>& eval_triples, const FilterIndex& filter,
                             const EvalOptions& options,
                             std::vector<PerQueryRank>* per_query = nullptr);

// Relation prediction: one query (h, ?, t) per triple.
MetricReport evaluate_relation(FlockModel& model, const KnowledgeGraph& context,
                               const std::vector<Triple>& eval_triples,
                               const FilterIndex& filter, const EvalOptions& options,
                               std::vector<PerQueryRank>* per_query = nullptr);

// Expected MRR of a uniform-random scorer given per-query candidate counts
// (mean over queries of H_m / m).
double expected_random_mrr(const std::vector<int>& candidate_counts);

}  // namespace flock
