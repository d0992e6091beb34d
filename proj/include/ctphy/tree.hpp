#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctphy/alphabet.hpp"

namespace ctphy {

// Exact arithmetic for context weights and coverage sums. Completeness of a
// tree (coverage == 1) is decided exactly; floating point enters only when
// entropies are evaluated.
using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& r);

// A sparse context (w_{-k},...,w_{-1}): one nonempty symbol set per history
// position, read past-to-present. Stored most-recent-first: set(0) is w_{-1}
// and set(k-1) is w_{-k}, so two contexts align position-by-position from
// index 0. The text form reads the other way, past-to-present: "abc|ac" is
// w_{-2}={a,b,c}, w_{-1}={a,c}.
class SparseContext {
public:
    // recent_first[i] = w_{-(i+1)}. Sets must be nonempty subsets of the
    // alphabet; the list must be nonempty.
    SparseContext(AlphabetPtr alphabet, std::vector<SymbolSet> recent_first);

    std::size_t length() const noexcept { return sets_.size(); }
    // i = 0 is the most recent position w_{-1}.
    const SymbolSet& set(std::size_t i) const { return sets_.at(i); }
    const std::vector<SymbolSet>& sets() const noexcept { return sets_; }

    const Alphabet& alphabet() const noexcept { return *alphabet_; }
    const AlphabetPtr& alphabet_ptr() const noexcept { return alphabet_; }

    // Canonical text: sets from w_{-k} down to w_{-1} joined by '|', members
    // in alphabet order.
    std::string to_text() const;
    static SparseContext from_text(std::string_view text, AlphabetPtr alphabet);

    // True when the last length() symbols of history (symbol indices,
    // oldest-first) fall positionwise inside this context's sets. history
    // must hold at least length() entries.
    bool matches(const std::vector<std::size_t>& history) const;

    friend bool operator==(const SparseContext& a, const SparseContext& b) {
        return *a.alphabet_ == *b.alphabet_ && a.sets_ == b.sets_;
    }
    friend bool operator!=(const SparseContext& a, const SparseContext& b) {
        return !(a == b);
    }

private:
    AlphabetPtr alphabet_;
    std::vector<SymbolSet> sets_;
};

// Number of plain length-l(w) histories covered by w, over |A|^l(w):
// s(w) * |A|^(-l(w)) with s(w) the product of the set cardinalities.
Rational context_weight(const SparseContext& w);

// Intersection of the history cylinders of w and v: empty (nullopt) when some
// aligned position has an empty set intersection, otherwise aligned positions
// carry the set intersections and deeper positions are copied from the longer
// context. Symmetric in its arguments. Throws on alphabet mismatch.
std::optional<SparseContext> context_intersect(const SparseContext& w,
                                               const SparseContext& v);

// An unordered collection of sparse contexts over one alphabet. Construction
// canonicalizes: set members are intrinsically ordered, contexts are sorted by
// their canonical text and deduplicated. Consistency (pairwise disjoint
// cylinders) is a property checked by validate_tree, not an invariant of the
// type: estimators and parsers build trees first and validate after.
class SparseContextTree {
public:
    SparseContextTree(AlphabetPtr alphabet, std::vector<SparseContext> contexts);

    // The tree whose single context is the full alphabet set: every history
    // matches it and its entropy is 0.
    static SparseContextTree root_tree(AlphabetPtr alphabet);

    const std::vector<SparseContext>& contexts() const noexcept { return contexts_; }
    std::size_t size() const noexcept { return contexts_.size(); }
    bool empty() const noexcept { return contexts_.empty(); }
    std::size_t max_depth() const noexcept;

    const Alphabet& alphabet() const noexcept { return *alphabet_; }
    const AlphabetPtr& alphabet_ptr() const noexcept { return alphabet_; }

    // Canonical-form equality: same alphabet, same context list.
    friend bool operator==(const SparseContextTree& a, const SparseContextTree& b) {
        return *a.alphabet_ == *b.alphabet_ && a.contexts_ == b.contexts_;
    }
    friend bool operator!=(const SparseContextTree& a, const SparseContextTree& b) {
        return !(a == b);
    }

private:
    AlphabetPtr alphabet_;
    std::vector<SparseContext> contexts_;
};

struct ValidationReport {
    // Indices into tree.contexts() of a pair whose cylinders overlap, i.e.
    // no aligned position within the shorter length separates them.
    struct Overlap {
        std::size_t first = 0;
        std::size_t second = 0;
    };

    bool is_consistent = true;
    // Exact sum of context weights; at most 1 whenever is_consistent holds.
    Rational coverage = 0;
    // Consistent and coverage == 1.
    bool is_complete = false;
    std::vector<Overlap> overlaps;
};

ValidationReport validate_tree(const SparseContextTree& tree);

// Common refinement: every nonempty pairwise context intersection, in
// canonical form. Preserves consistency and completeness. Inputs must be
// consistent and share one alphabet (throws on alphabet mismatch).
SparseContextTree tree_join(const SparseContextTree& a, const SparseContextTree& b);

// Extends a consistent tree to a complete one by recursively splitting the
// root cell against the existing contexts and emitting the uncovered cells.
// Original contexts are preserved verbatim; a complete tree comes back
// unchanged; the empty tree completes to root_tree. Throws if the input is
// inconsistent.
SparseContextTree auto_complete(const SparseContextTree& tree);

// Construction already canonicalizes; provided for API symmetry. Idempotent.
SparseContextTree canonicalize(SparseContextTree tree);

// Text format: one "alphabet=..." header line, then one context per line in
// canonical order. Serialization is byte-stable: parse(serialize(t)) == t and
// serialize(parse(s)) == s for canonical s.
std::string serialize_tree(const SparseContextTree& tree);
SparseContextTree parse_tree(std::string_view text);

}  // namespace ctphy
