#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctphy/tree.hpp"

namespace ctphy {

struct EstimatorConfig {
    std::size_t max_depth = 5;      // deepest history position considered
    std::size_t min_count = 2;      // pooled occurrences needed to extend a branch
    double merge_threshold = 0.10;  // bits; sibling symmetrized divergence below this merges
    double keep_threshold = 1.0;    // bits*count; child divergence gain below this folds
    double pseudocount = 0.5;       // additive smoothing for predictive distributions

    void validate() const;
};

// Transition counts for every plain (single-symbol) suffix of the sequence up
// to a depth bound. A suffix u = (u_{-j},...,u_{-1}) is counted only at
// positions with a full j-symbol history (no wrap-around), and a transition
// N(u,a) only where a next symbol exists, so sum_a N(u,a) can fall short of
// the occurrence count by the one suffix ending flush at the sequence end.
class ContextCounts {
public:
    static ContextCounts scan(std::string_view sequence, AlphabetPtr alphabet,
                              std::size_t max_depth);

    const Alphabet& alphabet() const noexcept { return *alphabet_; }
    const AlphabetPtr& alphabet_ptr() const noexcept { return alphabet_; }
    std::size_t max_depth() const noexcept { return tables_.size() - 1; }
    std::size_t sequence_length() const noexcept { return sequence_length_; }

    // u is given past-to-present ("ab" = x_{-2}=a, x_{-1}=b); depth 0 is the
    // empty suffix. Unknown suffixes count as zero.
    std::uint64_t occurrences(std::string_view u) const;
    std::uint64_t transitions(std::string_view u, char next) const;

    // Suffix codes are base-|A| with the most recent symbol as the least
    // significant digit; the estimator walks tables directly through these.
    struct Row {
        std::uint64_t occurrences = 0;
        const std::uint32_t* next = nullptr;  // |A| transition counts
    };
    Row row(std::size_t depth, std::uint64_t code) const;
    std::uint64_t extend_code(std::uint64_t code, std::size_t depth,
                              std::size_t symbol_index) const;
    const std::unordered_map<std::uint64_t, std::uint32_t>& codes_at(
        std::size_t depth) const {
        return tables_.at(depth).index;
    }

private:
    struct DepthTable {
        std::unordered_map<std::uint64_t, std::uint32_t> index;  // code -> row id
        std::vector<std::uint32_t> occurrences;                  // per row
        std::vector<std::uint32_t> next;                         // row-major |A| counts
    };

    AlphabetPtr alphabet_;
    std::vector<DepthTable> tables_;  // by depth, 0..max_depth
    std::vector<std::uint64_t> powers_;
    std::size_t sequence_length_ = 0;
};

// Next-symbol distribution for a sparse context, pooled over all compatible
// plain suffixes and smoothed with the pseudocount. zero_support marks the
// uniform fallback taken when nothing was observed and the pseudocount is 0.
struct PredictiveDistribution {
    std::vector<double> probability;
    bool zero_support = false;
};

PredictiveDistribution predictive_distribution(const ContextCounts& counts,
                                               const SparseContext& context,
                                               double pseudocount);

// A complete consistent tree with one next-symbol distribution per context,
// aligned with tree.contexts().
struct EstimatedModel {
    SparseContextTree tree;
    std::vector<std::vector<double>> probabilities;

    const std::vector<double>& distribution_for(const SparseContext& context) const;
};

// Estimates a sparse context tree from one sequence: grows plain suffixes
// with enough support, agglomeratively merges sibling symbols at the deepest
// position into sets (closest symmetrized divergence first, ties by alphabet
// order), keeps a child only when its divergence gain against the parent
// clears keep_threshold, then auto-completes. Deterministic.
EstimatedModel estimate_tree(std::string_view sequence, AlphabetPtr alphabet,
                             const EstimatorConfig& config = {});

// Batch estimation over many sequences; sequences are independent, so the
// parallel form fans out with OpenMP and matches the serial reference
// element-for-element.
std::vector<EstimatedModel> estimate_all(const std::vector<std::string>& sequences,
                                         AlphabetPtr alphabet,
                                         const EstimatorConfig& config = {});
std::vector<EstimatedModel> estimate_all_serial(const std::vector<std::string>& sequences,
                                                AlphabetPtr alphabet,
                                                const EstimatorConfig& config = {});

// Samples a sequence from the model. Each position draws from the context
// the available history already pins down; while several contexts are still
// compatible (only possible during the first max_depth positions) the draw
// falls back to uniform. From max_depth on, exactly one context must match;
// that uniqueness is asserted. Deterministic for a fixed seed; length must
// cover the max_depth warm-up.
std::string generate_sequence(const EstimatedModel& model, std::size_t length,
                              std::uint64_t seed);

// Model text: the tree serialization followed by one "context -> p(a)=..."
// line per context (6 decimals). config, when given, is echoed as a header
// comment. parse_model accepts exactly this shape.
std::string serialize_model(const EstimatedModel& model,
                            const EstimatorConfig* config = nullptr);
EstimatedModel parse_model(std::string_view text);

}  // namespace ctphy
