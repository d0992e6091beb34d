#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctphy/entropy.hpp"

namespace ctphy {

// Unrooted (or, after rooting, rooted) phylogenetic tree with branch lengths.
// Leaves carry labels; internal nodes have empty labels. A rooted tree is the
// same structure plus a designated degree-2 root node.
struct PhyloTree {
    struct Node {
        std::string label;  // empty for internal nodes
        bool is_leaf() const noexcept { return !label.empty(); }
    };
    struct Edge {
        std::size_t a = 0;
        std::size_t b = 0;
        double length = 0.0;
    };

    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::optional<std::size_t> root;

    std::size_t leaf_count() const noexcept;
    std::vector<std::string> leaf_labels() const;  // sorted
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency() const;
};

// Saitou-Nei neighbor joining. Requires n >= 2 taxa and a symmetric,
// nonnegative matrix (tolerance 1e-9). Deterministic: Q-criterion ties break
// toward the smallest (i,j) node-id pair; a negative pendant branch is
// clamped to 0 with the deficit moved to its sister so the pair sum is kept.
PhyloTree neighbor_join(const DistanceMatrix& distances);

// Splits the outgroup leaf's pendant edge at its midpoint and roots there.
// Input must be unrooted; throws when the taxon is missing.
PhyloTree root_at_outgroup(const PhyloTree& tree, std::string_view taxon);

// Removes a degree-2 root again, fusing its two edges; inverse of rooting.
PhyloTree unroot(const PhyloTree& tree);

// Canonical Newick text: 6-decimal branch lengths, children ordered by the
// smallest leaf label below them, labels quoted when they contain structural
// characters. Unrooted trees print from the internal node next to the
// smallest leaf; a 2-leaf tree prints as the single edge split at its
// midpoint. Terminated by ";" and a newline.
std::string newick_emit(const PhyloTree& tree);

// Debug view: one "node_a<TAB>node_b<TAB>length" line per edge.
std::string edge_list_tsv(const PhyloTree& tree);

}  // namespace ctphy
