#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ssx/complex.hpp"

namespace ssx {

// Typed simplex id: dimension plus index into that dimension's table.
struct Sid {
  int dim = 0;
  int64_t idx = 0;
  friend auto operator<=>(const Sid&, const Sid&) = default;
};

using SidPair = std::pair<Sid, Sid>;

// Binary relation on the simplices of one host structure. Pairs are stored
// sorted lexicographically without duplicates. host_uid identifies the
// structure the ids refer to; 0 means unbound (compatible with anything),
// and binary operations reject two distinct nonzero hosts.
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::vector<SidPair> pairs, uint64_t host_uid = 0);

  const std::vector<SidPair>& pairs() const { return pairs_; }
  uint64_t host_uid() const { return host_; }
  int64_t size() const { return static_cast<int64_t>(pairs_.size()); }
  bool empty() const { return pairs_.empty(); }
  bool contains(Sid a, Sid b) const;

  // R(u) = {tau : (u,tau) in R}, sorted. predecessors is the converse image.
  std::vector<Sid> successors(Sid u) const;
  std::vector<Sid> predecessors(Sid u) const;

  // Sorted unique ids appearing in either component.
  std::vector<Sid> support() const;

  friend bool operator==(const Relation& a, const Relation& b) {
    return a.pairs_ == b.pairs_;
  }

 private:
  std::vector<SidPair> pairs_;
  uint64_t host_ = 0;
};

struct TernaryRelation {
  std::vector<std::tuple<Sid, Sid, Sid>> triples;  // sorted, unique
  uint64_t host_uid = 0;
};

Relation union_(const Relation& a, const Relation& b);
Relation intersect(const Relation& a, const Relation& b);
// {(sigma,tau) : exists kappa with (sigma,kappa) in a and (kappa,tau) in b}.
Relation compose(const Relation& a, const Relation& b);
Relation converse(const Relation& a);
// {(sigma,kappa,tau) : (sigma,kappa) in a, (kappa,tau) in b}.
TernaryRelation join(const Relation& a, const Relation& b);
// k-fold composition of r with itself; k = 0 yields the identity on the
// ids appearing in r (the only finite carrier a bare relation knows).
Relation k_hop(const Relation& r, int k);

// One line per pair, "dim:idx dim:idx\n", in stored order.
std::string dump_relation(const Relation& r);

enum class AdjacencyIndexing { kGlobal, kPerDim };

// Boolean pattern with sorted coordinate entries; entry (i,j) set iff
// (sigma_i, tau_j) is in the relation.
struct SparseAdjacency {
  int64_t rows = 0, cols = 0;
  std::vector<std::pair<int64_t, int64_t>> entries;
};

// Global indexing concatenates dimension tables; per-dimension indexing
// requires every first component to share one dimension and every second
// component another, and indexes each side within its table.
SparseAdjacency to_adjacency(const Relation& r, const Complex& host,
                             AdjacencyIndexing indexing);

}  // namespace ssx
