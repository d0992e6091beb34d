#include "support/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <stdexcept>
#include <utility>

namespace ctphy::testsupport {

namespace {

std::size_t history_space(std::size_t alphabet_size, std::size_t depth) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < depth; ++i) total *= alphabet_size;
    return total;
}

// Digits of code, most recent symbol first: digit(0) is the symbol at
// position -1.
std::size_t digit(std::size_t code, std::size_t index, std::size_t base) {
    for (std::size_t i = 0; i < index; ++i) code /= base;
    return code % base;
}

}  // namespace

std::vector<std::size_t> match_counts(const SparseContextTree& tree, std::size_t depth) {
    const std::size_t base = tree.alphabet().size();
    const std::size_t total = history_space(base, depth);
    std::vector<std::size_t> counts(total, 0);
    for (std::size_t code = 0; code < total; ++code) {
        for (const SparseContext& context : tree.contexts()) {
            const auto& sets = context.sets();
            if (sets.size() > depth) {
                throw std::runtime_error("oracle depth shallower than the tree");
            }
            bool match = true;
            for (std::size_t i = 0; i < sets.size(); ++i) {
                if (!sets[i].contains(digit(code, i, base))) {
                    match = false;
                    break;
                }
            }
            if (match) ++counts[code];
        }
    }
    return counts;
}

HistoryPartition induced_partition(const SparseContextTree& tree, std::size_t depth) {
    const std::size_t base = tree.alphabet().size();
    const std::size_t total = history_space(base, depth);
    HistoryPartition partition;
    partition.depth = depth;
    partition.alphabet_size = base;
    partition.block.assign(total, 0);

    std::vector<std::uint32_t> block_of_context(tree.contexts().size(),
                                                std::uint32_t(-1));
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t matched = std::size_t(-1);
        std::size_t matches = 0;
        for (std::size_t k = 0; k < tree.contexts().size(); ++k) {
            const auto& sets = tree.contexts()[k].sets();
            bool match = sets.size() <= depth;
            for (std::size_t i = 0; match && i < sets.size(); ++i) {
                match = sets[i].contains(digit(code, i, base));
            }
            if (match) {
                matched = k;
                ++matches;
            }
        }
        if (matches != 1) {
            throw std::runtime_error("history matches " + std::to_string(matches) +
                                     " contexts; tree not a partition");
        }
        if (block_of_context[matched] == std::uint32_t(-1)) {
            block_of_context[matched] = static_cast<std::uint32_t>(partition.block_count++);
        }
        partition.block[code] = block_of_context[matched];
    }
    return partition;
}

bool partitions_equal(const HistoryPartition& a, const HistoryPartition& b) {
    // Block ids are first-seen dense on both sides, so equal partitions get
    // literally equal id vectors.
    return a.depth == b.depth && a.alphabet_size == b.alphabet_size &&
           a.block_count == b.block_count && a.block == b.block;
}

bool partition_refines(const HistoryPartition& fine, const HistoryPartition& coarse) {
    if (fine.depth != coarse.depth || fine.alphabet_size != coarse.alphabet_size) {
        return false;
    }
    std::vector<std::uint32_t> image(fine.block_count, std::uint32_t(-1));
    for (std::size_t code = 0; code < fine.block.size(); ++code) {
        std::uint32_t& target = image[fine.block[code]];
        if (target == std::uint32_t(-1)) {
            target = coarse.block[code];
        } else if (target != coarse.block[code]) {
            return false;
        }
    }
    return true;
}

HistoryPartition common_refinement(const HistoryPartition& a, const HistoryPartition& b) {
    if (a.depth != b.depth || a.alphabet_size != b.alphabet_size) {
        throw std::runtime_error("refining partitions over different history spaces");
    }
    HistoryPartition out;
    out.depth = a.depth;
    out.alphabet_size = a.alphabet_size;
    out.block.assign(a.block.size(), 0);
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> ids;
    for (std::size_t code = 0; code < a.block.size(); ++code) {
        auto key = std::make_pair(a.block[code], b.block[code]);
        auto [it, fresh] = ids.emplace(key, static_cast<std::uint32_t>(out.block_count));
        if (fresh) ++out.block_count;
        out.block[code] = it->second;
    }
    return out;
}

double oracle_entropy(const HistoryPartition& partition, double beta) {
    std::vector<std::size_t> sizes(partition.block_count, 0);
    for (std::uint32_t id : partition.block) ++sizes[id];
    const double total = static_cast<double>(partition.block.size());

    double h = 0.0;
    if (beta == 1.0) {
        for (std::size_t s : sizes) {
            const double p = static_cast<double>(s) / total;
            h -= p * std::log2(p);
        }
    } else {
        double sum = 0.0;
        for (std::size_t s : sizes) {
            sum += std::pow(static_cast<double>(s) / total, beta);
        }
        h = (sum - 1.0) / (std::pow(2.0, 1.0 - beta) - 1.0);
    }
    return h;
}

DistanceMatrix path_matrix(const PhyloTree& tree) {
    const std::vector<std::string> labels = tree.leaf_labels();
    DistanceMatrix matrix(labels);

    std::vector<std::size_t> leaf_index(tree.nodes.size(), std::size_t(-1));
    for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
        if (tree.nodes[v].is_leaf()) {
            auto it = std::lower_bound(labels.begin(), labels.end(), tree.nodes[v].label);
            leaf_index[v] = static_cast<std::size_t>(it - labels.begin());
        }
    }

    const auto adjacency = tree.adjacency();
    for (std::size_t start = 0; start < tree.nodes.size(); ++start) {
        if (leaf_index[start] == std::size_t(-1)) continue;
        std::vector<double> dist(tree.nodes.size(), -1.0);
        std::queue<std::size_t> queue;
        dist[start] = 0.0;
        queue.push(start);
        while (!queue.empty()) {
            std::size_t v = queue.front();
            queue.pop();
            for (auto [u, len] : adjacency[v]) {
                if (dist[u] < 0.0) {
                    dist[u] = dist[v] + len;
                    queue.push(u);
                }
            }
        }
        for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
            if (leaf_index[v] != std::size_t(-1)) {
                matrix.set(leaf_index[start], leaf_index[v],
                           v == start ? 0.0 : dist[v]);
            }
        }
    }
    return matrix;
}

PhyloTree random_additive_tree(std::size_t n_leaves, std::mt19937_64& rng) {
    if (n_leaves < 2) throw std::runtime_error("additive tree needs >= 2 leaves");
    auto u01 = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };
    auto length = [&] { return 0.1 + 1.9 * u01(); };

    PhyloTree tree;
    for (std::size_t i = 0; i < n_leaves; ++i) {
        tree.nodes.push_back({"t" + std::to_string(i)});
    }
    if (n_leaves == 2) {
        tree.edges.push_back({0, 1, length()});
        return tree;
    }

    tree.nodes.push_back({""});
    const std::size_t center = n_leaves;
    tree.edges.push_back({0, center, 0.0});
    tree.edges.push_back({1, center, 0.0});
    tree.edges.push_back({2, center, 0.0});
    for (std::size_t leaf = 3; leaf < n_leaves; ++leaf) {
        PhyloTree::Edge& split = tree.edges[rng() % tree.edges.size()];
        tree.nodes.push_back({""});
        const std::size_t mid = tree.nodes.size() - 1;
        const std::size_t other = split.b;
        split.b = mid;
        tree.edges.push_back({mid, other, 0.0});
        tree.edges.push_back({leaf, mid, 0.0});
    }
    for (auto& edge : tree.edges) edge.length = length();
    return tree;
}

std::set<std::string> nontrivial_splits(const PhyloTree& tree) {
    const auto adjacency = tree.adjacency();
    const std::size_t n_leaves = tree.leaf_count();
    std::set<std::string> splits;

    for (std::size_t skip = 0; skip < tree.edges.size(); ++skip) {
        // Leaves reachable from edge endpoint a without crossing the edge.
        std::vector<std::string> side;
        std::vector<char> seen(tree.nodes.size(), 0);
        std::vector<std::size_t> stack{tree.edges[skip].a};
        seen[tree.edges[skip].a] = 1;
        seen[tree.edges[skip].b] = 1;
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            if (tree.nodes[v].is_leaf()) side.push_back(tree.nodes[v].label);
            for (auto [u, len] : adjacency[v]) {
                (void)len;
                if (!seen[u]) {
                    seen[u] = 1;
                    stack.push_back(u);
                }
            }
        }
        if (side.size() < 2 || n_leaves - side.size() < 2) continue;

        std::vector<std::string> other;
        for (const auto& label : tree.leaf_labels()) {
            if (std::find(side.begin(), side.end(), label) == side.end()) {
                other.push_back(label);
            }
        }
        std::sort(side.begin(), side.end());
        auto join = [](const std::vector<std::string>& part) {
            std::string text;
            for (const auto& label : part) {
                text += label;
                text += ',';
            }
            return text;
        };
        std::string key_a = join(side);
        std::string key_b = join(other);
        splits.insert(std::min(key_a, key_b));
    }
    return splits;
}

}  // namespace ctphy::testsupport
