#include "flock/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flock/threads.hpp"

namespace flock {

void FilterIndex::add(const std::vector<Triple>& triples) {
  for (const Triple& t : triples) {
    tails_[key(t.head, t.rel)].push_back(t.tail);
    heads_[key(t.rel, t.tail)].push_back(t.head);
    rels_[key(t.head, t.tail)].push_back(t.rel);
  }
}

const std::vector<int>& FilterIndex::tails(int head, int rel) const {
  auto it = tails_.find(key(head, rel));
  return it == tails_.end() ? empty_ : it->second;
}
const std::vector<int>& FilterIndex::heads(int rel, int tail) const {
  auto it = heads_.find(key(rel, tail));
  return it == heads_.end() ? empty_ : it->second;
}
const std::vector<int>& FilterIndex::relations(int head, int tail) const {
  auto it = rels_.find(key(head, tail));
  return it == rels_.end() ? empty_ : it->second;
}

double filtered_rank(const std::vector<double>& scores, int true_idx,
                     const std::vector<int>& filtered) {
  if (true_idx < 0 || true_idx >= static_cast<int>(scores.size()))
    throw std::out_of_range("filtered_rank: true candidate out of range");
  std::vector<bool> drop(scores.size(), false);
  for (int f : filtered) {
    if (f == true_idx)
      throw std::invalid_argument("filtered_rank: the true candidate is in the filter set");
    if (f >= 0 && f < static_cast<int>(scores.size())) drop[f] = true;
  }
  double target = scores[true_idx];
  long greater = 0, ties = 0;
  for (size_t c = 0; c < scores.size(); ++c) {
    if (drop[c] || static_cast<int>(c) == true_idx) continue;
    if (scores[c] > target) ++greater;
    else if (scores[c] == target) ++ties;
  }
  return 1.0 + static_cast<double>(greater) + static_cast<double>(ties) / 2.0;
}

namespace {

struct QueryJob {
  Query query;
  int truth = 0;
  std::vector<int> filtered;  // known-true candidates, truth already removed
  const KnowledgeGraph* context = nullptr;
  std::string label;
};

MetricReport run_jobs(FlockModel& model, const std::vector<QueryJob>& jobs,
                      const EvalOptions& options, std::vector<PerQueryRank>* per_query) {
  int walks = options.walks;
  if (walks <= 0)
    walks = adapt_walk_count(options.policy, jobs.empty() ? 1 : jobs[0].context->num_entities(),
                             jobs.empty() ? 1 : static_cast<long>(jobs[0].context->triples().size()));
  Rng root(options.seed);
  std::vector<double> ranks(jobs.size());
  std::vector<int> counts(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), options.threads, [&](int i) {
    const QueryJob& job = jobs[i];
    nn::Array scores =
        model.ensemble(GraphView(*job.context), job.query, options.passes, walks,
                       root.substream(i));
    std::vector<double> s(scores.data.begin(), scores.data.end());
    ranks[i] = filtered_rank(s, job.truth, job.filtered);
    counts[i] = static_cast<int>(s.size()) - static_cast<int>(job.filtered.size());
  });
  MetricReport report;
  report.count = static_cast<long>(jobs.size());
  for (size_t i = 0; i < jobs.size(); ++i) {
    report.mrr += 1.0 / ranks[i];
    for (int k : options.hits_ks) report.hits_at[k] += ranks[i] <= k ? 1.0 : 0.0;
    if (per_query) per_query->push_back({jobs[i].label, ranks[i], counts[i]});
  }
  if (report.count > 0) {
    report.mrr /= static_cast<double>(report.count);
    for (auto& [k, v] : report.hits_at) v /= static_cast<double>(report.count);
  }
  return report;
}

std::vector<int> filtered_without(const std::vector<int>& known, int truth) {
  std::vector<int> out;
  out.reserve(known.size());
  for (int c : known)
    if (c != truth) out.push_back(c);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

MetricReport evaluate_entity(FlockModel& model, const KnowledgeGraph& context,
                             const std::vector<Triple>& eval_triples, const FilterIndex& filter,
                             const EvalOptions& options, std::vector<PerQueryRank>* per_query) {
  KnowledgeGraph reversed = context.reversed();
  std::vector<QueryJob> jobs;
  jobs.reserve(eval_triples.size() * 2);
  for (const Triple& t : eval_triples) {
    QueryJob tail_job;
    tail_job.query = Query::entity(t.head, t.rel);
    tail_job.truth = t.tail;
    tail_job.filtered = filtered_without(filter.tails(t.head, t.rel), t.tail);
    tail_job.context = &context;
    tail_job.label = "tail:" + std::to_string(t.head) + "," + std::to_string(t.rel) + "," +
                     std::to_string(t.tail);
    jobs.push_back(std::move(tail_job));
    if (!options.tail_only) {
      // head prediction runs as a tail query on the direction-reversed view
      QueryJob head_job;
      head_job.query = Query::entity(t.tail, t.rel);
      head_job.truth = t.head;
      head_job.filtered = filtered_without(filter.heads(t.rel, t.tail), t.head);
      head_job.context = &reversed;
      head_job.label = "head:" + std::to_string(t.head) + "," + std::to_string(t.rel) + "," +
                       std::to_string(t.tail);
      jobs.push_back(std::move(head_job));
    }
  }
  return run_jobs(model, jobs, options, per_query);
}

MetricReport evaluate_relation(FlockModel& model, const KnowledgeGraph& context,
                               const std::vector<Triple>& eval_triples,
                               const FilterIndex& filter, const EvalOptions& options,
                               std::vector<PerQueryRank>* per_query) {
  std::vector<QueryJob> jobs;
  jobs.reserve(eval_triples.size());
  for (const Triple& t : eval_triples) {
    QueryJob job;
    job.query = Query::relation(t.head, t.tail);
    job.truth = t.rel;
    job.filtered = filtered_without(filter.relations(t.head, t.tail), t.rel);
    job.context = &context;
    job.label = "rel:" + std::to_string(t.head) + "," + std::to_string(t.rel) + "," +
                std::to_string(t.tail);
    jobs.push_back(std::move(job));
  }
  return run_jobs(model, jobs, options, per_query);
}

double expected_random_mrr(const std::vector<int>& candidate_counts) {
  if (candidate_counts.empty()) throw std::invalid_argument("expected_random_mrr: no queries");
  double total = 0.0;
  for (int m : candidate_counts) {
    if (m < 1) throw std::invalid_argument("expected_random_mrr: empty candidate set");
    double harmonic = 0.0;
    for (int i = 1; i <= m; ++i) harmonic += 1.0 / i;
    total += harmonic / m;
  }
  return total / static_cast<double>(candidate_counts.size());
}

}  // namespace flock
