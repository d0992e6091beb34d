// Wall-clock comparison of the OpenMP kernels against their serial reference
// implementations, on synthetic inputs. The outputs are checked for equality
// first; a benchmark over diverging kernels would be meaningless.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "ctphy/entropy.hpp"
#include "ctphy/estimator.hpp"
#include "ctphy/synthetic.hpp"

using namespace ctphy;

namespace {

double seconds_of(const std::function<void()>& fn, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-22s serial %8.3fs   parallel %8.3fs   speedup %5.2fx\n", name, serial,
                parallel, parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n_trees = 64;
    std::size_t depth = 4;
    std::size_t alphabet_size = 4;
    std::size_t n_sequences = 16;
    std::size_t length = 200000;
    double beta = 1.0;
    int repeats = 3;
    std::uint64_t seed = 2024;

    CLI::App app{"Benchmark: parallel kernels vs serial references"};
    app.add_option("--trees", n_trees, "Trees in the distance benchmark")
        ->capture_default_str();
    app.add_option("--depth", depth, "Max depth of the random trees")->capture_default_str();
    app.add_option("--alphabet-size", alphabet_size, "Symbols in the alphabet (2..26)")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{2}, std::size_t{26}));
    app.add_option("--sequences", n_sequences, "Sequences in the estimation benchmark")
        ->capture_default_str();
    app.add_option("--length", length, "Length of each sequence")->capture_default_str();
    app.add_option("--beta", beta, "Entropy order")->capture_default_str();
    app.add_option("--repeats", repeats, "Timing repeats; the best run counts")
        ->capture_default_str();
    app.add_option("--seed", seed, "Seed for the synthetic inputs")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; both kernels run serially\n");
#endif

    AlphabetPtr alphabet =
        make_alphabet(std::string("abcdefghijklmnopqrstuvwxyz").substr(0, alphabet_size));
    std::mt19937_64 rng(seed);

    std::vector<LabeledTree> trees;
    for (std::size_t i = 0; i < n_trees; ++i) {
        trees.emplace_back("t" + std::to_string(i), random_complete_tree(alphabet, depth, rng));
    }

    const DistanceMatrix reference = distance_matrix_serial(trees, BetaParam(beta));
    const DistanceMatrix parallel = distance_matrix(trees, BetaParam(beta));
    for (std::size_t i = 0; i < reference.size(); ++i) {
        for (std::size_t j = 0; j < reference.size(); ++j) {
            if (reference.at(i, j) != parallel.at(i, j)) {
                std::fprintf(stderr, "distance kernels disagree at (%zu,%zu)\n", i, j);
                return 1;
            }
        }
    }
    report("distance_matrix",
           seconds_of([&] { distance_matrix_serial(trees, BetaParam(beta)); }, repeats),
           seconds_of([&] { distance_matrix(trees, BetaParam(beta)); }, repeats));

    std::vector<std::string> sequences;
    for (std::size_t i = 0; i < n_sequences; ++i) {
        std::string s(length, alphabet->symbols()[0]);
        for (auto& c : s) c = alphabet->symbols()[rng() % alphabet->size()];
        sequences.push_back(std::move(s));
    }
    const auto serial_models = estimate_all_serial(sequences, alphabet);
    const auto parallel_models = estimate_all(sequences, alphabet);
    for (std::size_t i = 0; i < serial_models.size(); ++i) {
        if (!(serial_models[i].tree == parallel_models[i].tree)) {
            std::fprintf(stderr, "estimation kernels disagree at %zu\n", i);
            return 1;
        }
    }
    report("estimate_all",
           seconds_of([&] { estimate_all_serial(sequences, alphabet); }, repeats),
           seconds_of([&] { estimate_all(sequences, alphabet); }, repeats));

    return 0;
}
