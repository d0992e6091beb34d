#include "ctphy/entropy.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace ctphy {

namespace {

constexpr double kNegativeTolerance = 1e-12;

// Weight of one context as a double. Numerator and denominator are exact in
// double up to 2^53, which covers every practical depth; beyond that the
// quotient is still correct to 1 ulp.
double weight_as_double(const SparseContext& w) {
    double span = 1.0;
    for (const SymbolSet& s : w.sets()) span *= static_cast<double>(s.count());
    double denom = std::pow(static_cast<double>(w.alphabet().size()),
                            static_cast<double>(w.length()));
    return span / denom;
}

void require_complete(const SparseContextTree& tree, const char* what) {
    ValidationReport report = validate_tree(tree);
    if (!report.is_complete)
        throw std::invalid_argument(
            std::string(what) +
            (report.is_consistent ? ": tree is not complete (auto_complete it first)"
                                  : ": tree has overlapping contexts"));
}

double entropy_unchecked(const SparseContextTree& tree, BetaParam beta) {
    if (beta.value == 1.0) {
        double h = 0.0;
        for (const SparseContext& w : tree.contexts()) {
            double p = weight_as_double(w);
            h -= p * std::log2(p);
        }
        return h;
    }
    // sum_w p·expm1((beta-1)·ln p) equals sum_w p^beta - 1 when the weights
    // sum to 1, but stays cancellation-free as beta approaches 1; same for
    // the normalizer 2^(1-beta) - 1.
    double num = 0.0;
    for (const SparseContext& w : tree.contexts()) {
        double p = weight_as_double(w);
        num += p * std::expm1((beta.value - 1.0) * std::log(p));
    }
    return num / std::expm1((1.0 - beta.value) * M_LN2);
}

double distance_of_completed(const SparseContextTree& ca, const SparseContextTree& cb,
                             BetaParam beta, double ha, double hb) {
    // (ha + hb) groups the per-tree terms so the result is bit-identical
    // under argument swap; IEEE addition commutes, subtraction order does not.
    double hj = entropy_unchecked(tree_join(ca, cb), beta);
    double d = 2.0 * hj - (ha + hb);
    if (d < 0.0 && d >= -kNegativeTolerance) d = 0.0;
    return d;
}

}  // namespace

BetaParam::BetaParam(double v) : value(v) {
    if (!(v > 0.0)) throw std::invalid_argument("beta must be positive");
}

double beta_entropy(const SparseContextTree& tree, BetaParam beta) {
    require_complete(tree, "beta_entropy");
    return entropy_unchecked(tree, beta);
}

double beta_distance(const SparseContextTree& a, const SparseContextTree& b,
                     BetaParam beta) {
    SparseContextTree ca = auto_complete(a);
    SparseContextTree cb = auto_complete(b);
    return distance_of_completed(ca, cb, beta, entropy_unchecked(ca, beta),
                                 entropy_unchecked(cb, beta));
}

DistanceMatrix::DistanceMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), values_(labels_.size() * labels_.size(), 0.0) {
    if (labels_.empty()) throw std::invalid_argument("distance matrix needs taxa");
    std::unordered_set<std::string> seen;
    for (const std::string& l : labels_)
        if (!seen.insert(l).second)
            throw std::invalid_argument("duplicate taxon label: " + l);
}

namespace {

// Completions and per-tree entropies are shared by every pair; both matrix
// variants start from this.
struct PreparedTrees {
    DistanceMatrix matrix;
    std::vector<SparseContextTree> completed;
    std::vector<double> entropy;
};

PreparedTrees prepare(const std::vector<LabeledTree>& trees, BetaParam beta) {
    if (trees.empty()) throw std::invalid_argument("distance_matrix: no trees");
    std::vector<std::string> labels;
    labels.reserve(trees.size());
    for (const auto& [label, tree] : trees) labels.push_back(label);
    for (std::size_t i = 1; i < trees.size(); ++i)
        if (trees[i].second.alphabet() != trees[0].second.alphabet())
            throw std::invalid_argument("distance_matrix: trees over different alphabets");

    PreparedTrees p{DistanceMatrix(std::move(labels)), {}, {}};
    p.completed.reserve(trees.size());
    for (const auto& [label, tree] : trees) p.completed.push_back(auto_complete(tree));
    p.entropy.resize(trees.size());
    for (std::size_t i = 0; i < p.completed.size(); ++i)
        p.entropy[i] = entropy_unchecked(p.completed[i], beta);
    return p;
}

}  // namespace

DistanceMatrix distance_matrix(const std::vector<LabeledTree>& trees, BetaParam beta) {
    PreparedTrees p = prepare(trees, beta);
    // Flattened strict upper triangle; every pair writes its own two cells,
    // so the schedule cannot change the result.
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(trees.size());
    const std::ptrdiff_t total = n * (n - 1) / 2;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < total; ++k) {
        std::ptrdiff_t i = 0;
        std::ptrdiff_t rest = k;
        while (rest >= n - 1 - i) {
            rest -= n - 1 - i;
            ++i;
        }
        const std::ptrdiff_t j = i + 1 + rest;
        const double d =
            distance_of_completed(p.completed[std::size_t(i)], p.completed[std::size_t(j)],
                                  beta, p.entropy[std::size_t(i)], p.entropy[std::size_t(j)]);
        p.matrix.set(std::size_t(i), std::size_t(j), d);
    }
    return std::move(p.matrix);
}

DistanceMatrix distance_matrix_serial(const std::vector<LabeledTree>& trees,
                                      BetaParam beta) {
    PreparedTrees p = prepare(trees, beta);
    for (std::size_t i = 0; i < p.completed.size(); ++i)
        for (std::size_t j = i + 1; j < p.completed.size(); ++j)
            p.matrix.set(i, j,
                         distance_of_completed(p.completed[i], p.completed[j], beta,
                                               p.entropy[i], p.entropy[j]));
    return std::move(p.matrix);
}

}  // namespace ctphy
