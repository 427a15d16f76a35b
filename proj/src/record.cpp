#include "flock/record.hpp"

#include <sstream>

namespace flock {

Record make_record(const Walk& walk, const Query& q, const RecordOptions& options) {
  int l = walk.length();
  Record rec;
  rec.node_anon.resize(l + 1);
  rec.rel_anon.resize(l + 1);
  rec.direction.resize(l + 1);
  rec.is_query_head.resize(l + 1);
  rec.is_query_rel.resize(l + 1);

  bool flag_tail = q.kind == QueryKind::kRelationPrediction;
  for (int s = 0; s <= l; ++s) {
    int node = walk.node_at(s);
    if (options.raw_ids) {
      rec.node_anon[s] = node;
    } else {
      int first = s;
      for (int t = 0; t < s; ++t) {
        if (walk.node_at(t) == node) {
          first = t;
          break;
        }
      }
      rec.node_anon[s] = first;
    }
    rec.is_query_head[s] =
        static_cast<uint8_t>(node == q.head || (flag_tail && node == q.tail));
    if (s == 0) {
      rec.rel_anon[s] = 0;  // the no-relation marker opens its own namespace slot
      rec.direction[s] = Direction::kNone;
      rec.is_query_rel[s] = 0;
      continue;
    }
    const WalkStep& step = walk.steps[s - 1];
    if (options.raw_ids) {
      rec.rel_anon[s] = step.rel + 1;
    } else {
      // First step with the same relation in either orientation.
      int first = s;
      for (int t = 1; t < s; ++t) {
        if (walk.steps[t - 1].rel == step.rel) {
          first = t;
          break;
        }
      }
      rec.rel_anon[s] = first;
    }
    rec.direction[s] = options.drop_direction ? Direction::kForward : step.dir;
    rec.is_query_rel[s] =
        static_cast<uint8_t>(q.kind == QueryKind::kEntityPrediction && step.rel == q.rel);
  }
  return rec;
}

bool anon_translate_check(const Walk& walk, const Isomorphism& mu, const Query& q) {
  mu.validate(static_cast<int>(mu.node_map.size()), static_cast<int>(mu.rel_map.size()));
  return make_record(walk, q) == make_record(apply_isomorphism(walk, mu), apply_isomorphism(q, mu));
}

std::string format_record(const Record& rec) {
  std::ostringstream out;
  for (int s = 0; s < rec.length(); ++s) {
    if (s > 0) {
      out << " -[" << rec.rel_anon[s];
      out << (rec.direction[s] == Direction::kInverse ? " inv" : " fwd");
      if (rec.is_query_rel[s]) out << " qr";
      out << "]-> ";
    }
    out << rec.node_anon[s];
    if (rec.is_query_head[s]) out << "*";
  }
  return out.str();
}

}  // namespace flock
