#include "ctphy/phylo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace ctphy {

namespace {

std::string format6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

constexpr double kInputTolerance = 1e-9;

}  // namespace

std::size_t PhyloTree::leaf_count() const noexcept {
    std::size_t n = 0;
    for (const Node& node : nodes)
        if (node.is_leaf()) ++n;
    return n;
}

std::vector<std::string> PhyloTree::leaf_labels() const {
    std::vector<std::string> labels;
    for (const Node& node : nodes)
        if (node.is_leaf()) labels.push_back(node.label);
    std::sort(labels.begin(), labels.end());
    return labels;
}

std::vector<std::vector<std::pair<std::size_t, double>>> PhyloTree::adjacency() const {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(nodes.size());
    for (const Edge& e : edges) {
        adj[e.a].emplace_back(e.b, e.length);
        adj[e.b].emplace_back(e.a, e.length);
    }
    return adj;
}

PhyloTree neighbor_join(const DistanceMatrix& distances) {
    const std::size_t n = distances.size();
    if (n < 2) throw std::invalid_argument("neighbor_join needs at least 2 taxa");
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(distances.at(i, i)) > kInputTolerance)
            throw std::invalid_argument("neighbor_join: nonzero diagonal at " +
                                        distances.labels()[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (distances.at(i, j) < -kInputTolerance)
                throw std::invalid_argument("neighbor_join: negative distance between " +
                                            distances.labels()[i] + " and " +
                                            distances.labels()[j]);
            if (std::abs(distances.at(i, j) - distances.at(j, i)) > kInputTolerance)
                throw std::invalid_argument("neighbor_join: matrix not symmetric at " +
                                            distances.labels()[i] + "/" +
                                            distances.labels()[j]);
        }
    }

    PhyloTree tree;
    tree.nodes.reserve(2 * n);
    for (const std::string& label : distances.labels()) tree.nodes.push_back({label});

    // Working distances indexed by node id; grows as joins add nodes.
    std::vector<std::vector<double>> d(2 * n, std::vector<double>(2 * n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i][j] = distances.at(i, j);

    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;

    while (active.size() > 2) {
        const std::size_t m = active.size();
        std::vector<double> r(tree.nodes.size(), 0.0);
        for (std::size_t x : active) {
            double s = 0.0;
            for (std::size_t y : active) s += d[x][y];
            r[x] = s;
        }

        double best_q = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t ii = 0; ii < m; ++ii) {
            for (std::size_t jj = ii + 1; jj < m; ++jj) {
                std::size_t x = active[ii], y = active[jj];
                double q = double(m - 2) * d[x][y] - r[x] - r[y];
                if (q < best_q) {  // strict: ties keep the smallest (i,j) pair
                    best_q = q;
                    bi = ii;
                    bj = jj;
                }
            }
        }

        const std::size_t x = active[bi], y = active[bj];
        double lx = 0.5 * d[x][y] + (r[x] - r[y]) / (2.0 * double(m - 2));
        double ly = d[x][y] - lx;
        if (lx < 0.0) {
            ly = d[x][y];
            lx = 0.0;
        } else if (ly < 0.0) {
            lx = d[x][y];
            ly = 0.0;
        }

        const std::size_t u = tree.nodes.size();
        tree.nodes.push_back({});
        tree.edges.push_back({u, x, lx});
        tree.edges.push_back({u, y, ly});

        for (std::size_t z : active) {
            if (z == x || z == y) continue;
            double duz = 0.5 * (d[x][z] + d[y][z] - d[x][y]);
            d[u][z] = d[z][u] = duz;
        }
        active.erase(active.begin() + std::ptrdiff_t(bj));
        active.erase(active.begin() + std::ptrdiff_t(bi));
        active.push_back(u);
    }

    const std::size_t a = active[0], b = active[1];
    tree.edges.push_back({a, b, std::max(0.0, d[a][b])});
    return tree;
}

PhyloTree root_at_outgroup(const PhyloTree& tree, std::string_view taxon) {
    if (tree.root) throw std::invalid_argument("root_at_outgroup expects an unrooted tree");
    std::size_t leaf = tree.nodes.size();
    for (std::size_t i = 0; i < tree.nodes.size(); ++i)
        if (tree.nodes[i].label == taxon) leaf = i;
    if (leaf == tree.nodes.size())
        throw std::runtime_error("outgroup taxon not in tree: " + std::string(taxon));

    PhyloTree out = tree;
    std::size_t pendant = out.edges.size();
    for (std::size_t e = 0; e < out.edges.size(); ++e)
        if (out.edges[e].a == leaf || out.edges[e].b == leaf) {
            pendant = e;
            break;
        }
    if (pendant == out.edges.size())
        throw std::runtime_error("outgroup taxon is disconnected: " + std::string(taxon));

    const PhyloTree::Edge old = out.edges[pendant];
    const std::size_t other = old.a == leaf ? old.b : old.a;
    const std::size_t root = out.nodes.size();
    out.nodes.push_back({});
    out.edges.erase(out.edges.begin() + std::ptrdiff_t(pendant));
    out.edges.push_back({root, leaf, old.length / 2.0});
    out.edges.push_back({root, other, old.length / 2.0});
    out.root = root;
    return out;
}

PhyloTree unroot(const PhyloTree& tree) {
    if (!tree.root) throw std::invalid_argument("unroot expects a rooted tree");
    const std::size_t root = *tree.root;
    std::vector<std::size_t> touching;
    for (std::size_t e = 0; e < tree.edges.size(); ++e)
        if (tree.edges[e].a == root || tree.edges[e].b == root) touching.push_back(e);
    if (touching.size() != 2)
        throw std::invalid_argument("unroot: root degree must be 2");

    const PhyloTree::Edge& e0 = tree.edges[touching[0]];
    const PhyloTree::Edge& e1 = tree.edges[touching[1]];
    const std::size_t a = e0.a == root ? e0.b : e0.a;
    const std::size_t b = e1.a == root ? e1.b : e1.a;

    PhyloTree out;
    out.root = std::nullopt;
    // The root node is dropped; ids after it shift down by one.
    auto remap = [root](std::size_t id) { return id > root ? id - 1 : id; };
    for (std::size_t i = 0; i < tree.nodes.size(); ++i)
        if (i != root) out.nodes.push_back(tree.nodes[i]);
    for (std::size_t e = 0; e < tree.edges.size(); ++e) {
        if (e == touching[0] || e == touching[1]) continue;
        out.edges.push_back(
            {remap(tree.edges[e].a), remap(tree.edges[e].b), tree.edges[e].length});
    }
    out.edges.push_back({remap(a), remap(b), e0.length + e1.length});
    return out;
}

namespace {

std::string quote_label(const std::string& label) {
    bool needs_quote = label.empty();
    for (char c : label)
        if (c == ' ' || c == '(' || c == ')' || c == ':' || c == ';' || c == ',' ||
            c == '\'' || c == '[' || c == ']' || c == '\t')
            needs_quote = true;
    if (!needs_quote) return label;
    std::string out = "'";
    for (char c : label) {
        out.push_back(c);
        if (c == '\'') out.push_back('\'');
    }
    out.push_back('\'');
    return out;
}

struct NewickWriter {
    const PhyloTree& tree;
    const std::vector<std::vector<std::pair<std::size_t, double>>> adj;

    // Smallest leaf label in the subtree rooted at `node`, looking away from
    // `from`; drives the canonical child order.
    std::string min_leaf(std::size_t node, std::size_t from) const {
        if (tree.nodes[node].is_leaf()) return tree.nodes[node].label;
        std::string best;
        for (const auto& [next, len] : adj[node]) {
            if (next == from) continue;
            std::string sub = min_leaf(next, node);
            if (best.empty() || sub < best) best = sub;
        }
        return best;
    }

    void write(std::string& out, std::size_t node, std::size_t from) const {
        if (tree.nodes[node].is_leaf()) {
            out += quote_label(tree.nodes[node].label);
            return;
        }
        std::vector<std::pair<std::string, std::pair<std::size_t, double>>> children;
        for (const auto& child : adj[node]) {
            if (child.first == from) continue;
            children.emplace_back(min_leaf(child.first, node), child);
        }
        std::sort(children.begin(), children.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        out.push_back('(');
        for (std::size_t i = 0; i < children.size(); ++i) {
            if (i > 0) out.push_back(',');
            write(out, children[i].second.first, node);
            out.push_back(':');
            out += format6(children[i].second.second);
        }
        out.push_back(')');
    }
};

}  // namespace

std::string newick_emit(const PhyloTree& tree) {
    if (tree.nodes.empty()) throw std::invalid_argument("newick_emit: empty tree");

    // Two leaves joined by one edge: print the edge split at its midpoint.
    if (!tree.root && tree.nodes.size() == 2 && tree.edges.size() == 1) {
        const PhyloTree::Edge& e = tree.edges[0];
        std::size_t first = e.a, second = e.b;
        if (tree.nodes[second].label < tree.nodes[first].label) std::swap(first, second);
        double half = e.length / 2.0;
        return "(" + quote_label(tree.nodes[first].label) + ":" + format6(half) + "," +
               quote_label(tree.nodes[second].label) + ":" + format6(half) + ");\n";
    }

    NewickWriter writer{tree, tree.adjacency()};
    std::size_t start;
    if (tree.root) {
        start = *tree.root;
    } else {
        // Deterministic print root: the internal node next to the smallest leaf.
        std::size_t best_leaf = tree.nodes.size();
        for (std::size_t i = 0; i < tree.nodes.size(); ++i)
            if (tree.nodes[i].is_leaf() &&
                (best_leaf == tree.nodes.size() ||
                 tree.nodes[i].label < tree.nodes[best_leaf].label))
                best_leaf = i;
        if (best_leaf == tree.nodes.size())
            throw std::invalid_argument("newick_emit: tree has no leaves");
        if (writer.adj[best_leaf].size() != 1)
            throw std::invalid_argument("newick_emit: leaf degree must be 1");
        start = writer.adj[best_leaf][0].first;
    }

    std::string out;
    writer.write(out, start, start);  // from == start: no parent to skip
    out += ";\n";
    return out;
}

std::string edge_list_tsv(const PhyloTree& tree) {
    std::string out = "node_a\tnode_b\tlength\n";
    for (const PhyloTree::Edge& e : tree.edges) {
        auto name = [&](std::size_t id) {
            return tree.nodes[id].is_leaf() ? tree.nodes[id].label
                                            : "inner" + std::to_string(id);
        };
        out += name(e.a) + "\t" + name(e.b) + "\t" + format6(e.length) + "\n";
    }
    return out;
}

}  // namespace ctphy
