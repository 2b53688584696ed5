#pragma once

// Exact arithmetic and word metrics in the lamplighter groups Z/m wreath Z:
// canonical finitely-supported light configurations with a cursor, word
// lengths by pruned bidirectional breadth-first search over the Cayley
// graph, the comparison table for the two standard generating sets, and the
// certificate that their word metrics are not roughly similar through the
// identity map.

#include <optional>
#include <string>
#include <vector>

#include "solvgeo/roughsim.hpp"

namespace solvgeo {

// Canonical form: colors[0] and colors.back() are nonzero, lo is the
// position of colors[0]; an all-dark configuration stores an empty array
// with lo = 0. The modulus is part of the element.
struct LampElement {
    int m = 2;
    int lo = 0;
    std::vector<int> colors;
    int cursor = 0;
};

bool operator==(const LampElement& a, const LampElement& b);
bool operator!=(const LampElement& a, const LampElement& b);

LampElement lamp_identity(int m);
LampElement lamp_a(int m);  // adds one to the color under the cursor
LampElement lamp_t(int m);  // moves the cursor one step right

LampElement lamp_multiply(const LampElement& g, const LampElement& h);
LampElement lamp_inverse(const LampElement& g);
LampElement lamp_power(const LampElement& g, int n);

// The two element families of the word-metric comparison: a single lit lamp
// at position n with the cursor back at the origin, and a run of n lit
// lamps with the cursor at its far end.
LampElement far_lamp(int m, int n);  // t^n a t^-n
LampElement lamp_run(int m, int n);  // (ta)^n

struct GenSet {
    std::string name;
    std::vector<LampElement> generators;  // inverses are added by the engine
};

GenSet wreath_gens(int m);     // {a, t}
GenSet automaton_gens(int m);  // {t, ta}

// Admissible word-length lower bound: the minimal cursor walk covering the
// lit support, combined with the lamp edits still needed. Additive when no
// generator both moves and edits, otherwise a max.
int lamp_lower_bound(const GenSet& s, const LampElement& g);

// Exact geodesic length via bidirectional breadth-first search meeting in
// the middle, pruned by the admissible bound; empty when the length exceeds
// radius_cap.
std::optional<int> word_length(const GenSet& s, const LampElement& g, int radius_cap);

// Plain single-source breadth-first search. full_ball enumerates every
// element with its distance; word_length_exhaustive is the same search run
// until the target or the cap is hit, as an independent check on the
// bidirectional result.
std::vector<std::pair<LampElement, int>> full_ball(const GenSet& s, int radius);
std::optional<int> word_length_exhaustive(const GenSet& s, const LampElement& g, int radius_cap);

// One row of the word-metric table: distances of far_lamp(n) and
// lamp_run(n) under both generating sets. Every entry is backed by an
// explicit witness word (multiplied out and checked against the target) and
// a search that proves no shorter word exists; entries land empty only if a
// caller-supplied cap cuts the search short.
struct TableRow {
    int n = 0;
    std::optional<int> dw_far, da_far;  // single far lamp under S_w, S_a
    std::optional<int> dw_run, da_run;  // lamp run under S_w, S_a
};

std::vector<TableRow> word_metric_table(int m, int n_max);

// The two families have word-length ratios d_w/d_a approaching 1 and 2, so
// no single multiplicative constant fits both: the rough-similarity
// comparison on the family distances returns NotRoughlySimilar.
struct LampCertificate {
    int m = 2;
    int n_max = 0;
    double far_ratio = 0.0;   // d_w/d_a of far_lamp at n_max
    double run_ratio = 0.0;   // d_w/d_a of lamp_run at n_max
    double gap = 0.0;         // run_ratio - far_ratio
    SimilarityReport comparison;
};

LampCertificate non_similarity_certificate(int m, int n_max);

}  // namespace solvgeo
