#pragma once

#include <string>
#include <vector>

#include "flock/kg.hpp"
#include "flock/walk.hpp"

namespace flock {

// Options exist only so the verification harness can inject known-broken
// anonymization and demonstrate the invariance checks catch it.
struct RecordOptions {
  bool drop_direction = false;  // mutation: record every step as forward
  bool raw_ids = false;         // mutation: leak raw graph ids instead of anonymized names
};

// Graph-agnostic view of one walk: per step, anonymized node/relation
// names, traversal direction, and query flags. Step 0 holds the
// no-relation marker (rel_anon 0, direction none). Anonymized names are
// the index of the step where the node (or the relation, in either
// orientation) was first seen, so they never exceed the walk length and
// carry no graph-specific identity.
struct Record {
  std::vector<int> node_anon;
  std::vector<int> rel_anon;
  std::vector<Direction> direction;
  std::vector<uint8_t> is_query_head;
  std::vector<uint8_t> is_query_rel;

  int length() const { return static_cast<int>(node_anon.size()); }
  friend bool operator==(const Record&, const Record&) = default;
};

// For relation-prediction queries the head flag fires at both endpoints
// and the relation flag is identically zero.
Record make_record(const Walk& walk, const Query& q, const RecordOptions& options = {});

// True iff the record of the walk equals the record of its relabeled view
// under mu (with the query relabeled too). The recording protocol is
// deterministic, so this is an exact comparison.
bool anon_translate_check(const Walk& walk, const Isomorphism& mu, const Query& q);

// Arrow-notation dump, e.g. "0 -[1 fwd qr]-> 1 -[2 inv]-> 2".
std::string format_record(const Record& rec);

}  // namespace flock
