#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssx/complex.hpp"
#include "ssx/digraph.hpp"

namespace ssx {

// Color per element, dense ids 0..C-1 assigned by signature rank, so two
// isomorphic structures color to identical vectors up to the relabeling.
// rounds counts the strictly refining iterations.
struct Coloring {
  std::vector<int> colors;
  int rounds = 0;
  int num_colors() const;
};

// Refinement input: elements 0..num_elements-1 plus an ordered list of named
// relations given as successor lists (adj[r][e] = sorted related elements).
struct WlStructure {
  int64_t num_elements = 0;
  std::vector<std::string> names;
  std::vector<std::vector<std::vector<int64_t>>> adj;
};

// Vertex structure under {r_in, r_out} (directed) or {r_sym}.
WlStructure wl_from_digraph(const Digraph& g, bool directed);
// All simplices (global ids) under the 'U' or 'D' relation family.
WlStructure wl_from_complex(const Complex& c, char family);

Coloring wl_init_constant(int64_t n);
// Canonical init from labels: equal strings share a color, ids by rank.
Coloring wl_init_from_labels(const std::vector<std::string>& labels);

// Iterates signature interning until the partition stabilizes (or max_rounds
// refining rounds). Each round sorts the signatures and assigns rank ids, so
// the result is canonical; an empty relation list returns the (normalized)
// init unchanged.
Coloring refine(const WlStructure& s, const Coloring& init,
                int max_rounds = -1);
Coloring refine(const WlStructure& s);

// True iff a's partition is elementwise contained in b's.
bool refines(const Coloring& a, const Coloring& b);

struct ColorHistogram {
  std::vector<std::pair<int, int64_t>> counts;  // (color, count), sorted
  friend bool operator==(const ColorHistogram&, const ColorHistogram&) =
      default;
};

ColorHistogram histogram(const Coloring& c);
// Stable canonical histogram of the family refinement over all simplices.
ColorHistogram sswl_histogram(const Complex& c, char family);

// Joint refinement on the disjoint union (relations aligned by name, missing
// names padded empty) so the two histograms share one color space.
struct WlVerdict {
  bool separated = false;
  int rounds = 0;
  ColorHistogram left, right;
};

WlVerdict wl_compare(const WlStructure& a, const WlStructure& b,
                     const Coloring* init_a = nullptr,
                     const Coloring* init_b = nullptr);
WlVerdict sswl_compare(const Complex& a, const Complex& b, char family);
WlVerdict dirwl_compare(const Digraph& a, const Digraph& b,
                        bool directed = true);

// Named non-isomorphic graph pairs exercising the separation baselines.
struct FixturePair {
  std::string name;
  std::string note;
  Digraph left, right;
};

std::vector<FixturePair> fixtures();
// Lookup by name; throws ValidationError for unknown names.
FixturePair fixture(const std::string& name);

}  // namespace ssx
