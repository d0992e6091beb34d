#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ctphy/tree.hpp"

namespace ctphy {

// Entropy order. beta == 1 selects the Shannon case (base-2 logarithm); any
// other positive value selects the generalized form. Dispatch is exact on
// the value 1.
struct BetaParam {
    explicit BetaParam(double v);
    double value;
};

// Entropy of the history partition induced by a complete consistent tree,
// from the context weights p_w = s(w)·|A|^(-l(w)):
//   beta == 1:  -sum p_w log2 p_w
//   beta != 1:  (sum p_w^beta - 1) / (2^(1-beta) - 1)
// The tree must be complete (see auto_complete); throws otherwise.
double beta_entropy(const SparseContextTree& tree, BetaParam beta);

// 2·H(join) - H(a) - H(b) over auto-completed inputs. Nonnegative, symmetric
// (bit-identical under argument swap), zero exactly on partition equality;
// values within 1e-12 below zero are clamped to 0. Throws on alphabet
// mismatch. A metric for beta >= 1. For beta < 1 the entropy is superadditive
// on independent partitions, so the triangle inequality can fail (partitions
// by the two most recent symbols against the root tree already break it);
// treat those values as a symmetric divergence, not a metric.
double beta_distance(const SparseContextTree& a, const SparseContextTree& b,
                     BetaParam beta);

// Symmetric distance matrix with zero diagonal and distinct row labels.
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::vector<std::string> labels);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    double at(std::size_t i, std::size_t j) const { return values_.at(i * size() + j); }
    void set(std::size_t i, std::size_t j, double v) {
        values_.at(i * size() + j) = v;
        values_.at(j * size() + i) = v;
    }

private:
    std::vector<std::string> labels_;
    std::vector<double> values_;
};

using LabeledTree = std::pair<std::string, SparseContextTree>;

// All-pairs beta_distance. Entry (i,j) for i < j, mirrored; diagonal exactly
// 0. Labels must be distinct and input nonempty; all trees share one
// alphabet. distance_matrix runs the pair loop with OpenMP when available and
// is cell-for-cell identical to distance_matrix_serial regardless of
// schedule; the serial form is the reference the tests compare against.
DistanceMatrix distance_matrix(const std::vector<LabeledTree>& trees, BetaParam beta);
DistanceMatrix distance_matrix_serial(const std::vector<LabeledTree>& trees,
                                      BetaParam beta);

}  // namespace ctphy
