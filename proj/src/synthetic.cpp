#include "ctphy/synthetic.hpp"

#include <algorithm>
#include <vector>

namespace ctphy {

namespace {

struct Generator {
    const AlphabetPtr& alphabet;
    std::mt19937_64& rng;
    std::size_t max_depth;
    std::vector<SparseContext> out;

    double u01() { return double(rng() >> 11) * 0x1.0p-53; }

    void emit(std::vector<SymbolSet> cell) {
        // A full set at the deepest position does not constrain anything:
        // strip it so equal partitions get equal canonical forms.
        const SymbolSet full = SymbolSet::full(*alphabet);
        while (!cell.empty() && cell.back() == full) cell.pop_back();
        if (cell.empty()) cell.push_back(full);
        out.emplace_back(alphabet, std::move(cell));
    }

    void descend(std::vector<SymbolSet>& cell) {
        const bool forced = cell.size() >= max_depth;
        const double stop_p = cell.empty() ? 0.08 : 0.45;
        if (forced || u01() < stop_p) {
            emit(cell);
            return;
        }
        const std::size_t n = alphabet->size();
        const double pick = u01();
        std::size_t k = pick < 0.12 ? 1 : pick < 0.55 ? 2 : pick < 0.85 ? 3 : 4;
        k = std::min(k, n);
        std::vector<std::uint64_t> blocks(k, 0);
        for (std::size_t s = 0; s < n; ++s) blocks[rng() % k] |= std::uint64_t{1} << s;
        for (std::uint64_t mask : blocks) {
            if (!mask) continue;
            cell.push_back(SymbolSet::from_mask(mask));
            descend(cell);
            cell.pop_back();
        }
    }
};

}  // namespace

SparseContextTree random_complete_tree(AlphabetPtr alphabet, std::size_t max_depth,
                                       std::mt19937_64& rng) {
    Generator gen{alphabet, rng, std::max<std::size_t>(1, max_depth), {}};
    std::vector<SymbolSet> cell;
    gen.descend(cell);
    return SparseContextTree(alphabet, std::move(gen.out));
}

}  // namespace ctphy
