#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctphy/estimator.hpp"
#include "support/oracle.hpp"
#include "support/util.hpp"

using namespace ctphy;
using namespace ctphy::testsupport;

namespace {
const AlphabetPtr kAb = make_alphabet("ab");
const AlphabetPtr kAbcd = make_alphabet("abcd");

std::string repeat(std::string_view unit, std::size_t copies) {
    std::string out;
    out.reserve(unit.size() * copies);
    for (std::size_t i = 0; i < copies; ++i) out += unit;
    return out;
}

EstimatedModel flat_model(const AlphabetPtr& alphabet) {
    EstimatedModel model{SparseContextTree::root_tree(alphabet), {}};
    model.probabilities.push_back(
        std::vector<double>(alphabet->size(), 1.0 / double(alphabet->size())));
    return model;
}
}  // namespace

TEST_CASE("suffix counting matches hand counts") {
    SUBCASE("aab at depth 1") {
        auto counts = ContextCounts::scan("aab", kAb, 1);
        CHECK(counts.transitions("a", 'a') == 1);
        CHECK(counts.transitions("a", 'b') == 1);
        CHECK(counts.transitions("b", 'a') == 0);
        CHECK(counts.transitions("b", 'b') == 0);
        CHECK(counts.occurrences("a") == 2);
        CHECK(counts.occurrences("b") == 1);
    }
    SUBCASE("abab at depth 2") {
        auto counts = ContextCounts::scan("abab", kAb, 2);
        CHECK(counts.transitions("ab", 'a') == 1);
        CHECK(counts.transitions("ab", 'b') == 0);
        CHECK(counts.transitions("ba", 'b') == 1);
        CHECK(counts.transitions("a", 'b') == 2);
        CHECK(counts.transitions("b", 'a') == 1);
        CHECK(counts.transitions("a", 'a') == 0);
        CHECK(counts.occurrences("ab") == 2);
        CHECK(counts.occurrences("ba") == 1);
    }
    SUBCASE("aaaa at depth 1") {
        auto counts = ContextCounts::scan("aaaa", kAb, 1);
        CHECK(counts.transitions("a", 'a') == 3);
        CHECK(counts.occurrences("a") == 4);
    }
    SUBCASE("occurrences exceed transitions only at the sequence end") {
        auto counts = ContextCounts::scan("abba", kAb, 2);
        // The final 'a' ends the sequence: counted as an occurrence, no
        // outgoing transition.
        CHECK(counts.occurrences("a") == 2);
        CHECK(counts.transitions("a", 'a') + counts.transitions("a", 'b') == 1);
    }
    SUBCASE("out-of-alphabet symbols are named with their position") {
        CHECK_THROWS_WITH_AS(ContextCounts::scan("axb", kAb, 1),
                             doctest::Contains("'x'"), std::runtime_error);
        try {
            ContextCounts::scan("abxa", kAb, 1);
            FAIL("expected a throw");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("3") != std::string::npos);
        }
    }
}

TEST_CASE("predictive distributions pool compatible suffixes") {
    SUBCASE("deterministic alternation with no smoothing") {
        auto counts = ContextCounts::scan(repeat("ab", 50), kAb, 1);
        auto dist = predictive_distribution(counts, ctx(kAb, "a"), 0.0);
        CHECK(dist.probability[0] == 0.0);
        CHECK(dist.probability[1] == 1.0);
        CHECK_FALSE(dist.zero_support);
    }
    SUBCASE("zero support with positive pseudocount gives uniform, unflagged") {
        auto counts = ContextCounts::scan("bbbb", kAb, 1);
        auto dist = predictive_distribution(counts, ctx(kAb, "a"), 0.5);
        CHECK(dist.probability[0] == 0.5);
        CHECK(dist.probability[1] == 0.5);
        CHECK_FALSE(dist.zero_support);
    }
    SUBCASE("zero support with zero pseudocount gives uniform, flagged") {
        auto counts = ContextCounts::scan("bbbb", kAb, 1);
        auto dist = predictive_distribution(counts, ctx(kAb, "a"), 0.0);
        CHECK(dist.probability[0] == 0.5);
        CHECK(dist.probability[1] == 0.5);
        CHECK(dist.zero_support);
    }
    SUBCASE("periodic aab splits transitions from a evenly") {
        auto counts = ContextCounts::scan(repeat("aab", 33), kAb, 1);
        auto dist = predictive_distribution(counts, ctx(kAb, "a"), 0.0);
        CHECK(dist.probability[0] == doctest::Approx(0.5).epsilon(0.02));
        CHECK(dist.probability[1] == doctest::Approx(0.5).epsilon(0.02));
    }
    SUBCASE("set contexts pool over members") {
        auto counts = ContextCounts::scan(repeat("ab", 50), kAb, 1);
        auto dist = predictive_distribution(counts, ctx(kAb, "ab"), 0.0);
        // Pooled over both symbols the chain is 50/50 up to the boundary.
        CHECK(dist.probability[0] == doctest::Approx(0.5).epsilon(0.02));
    }
    SUBCASE("distributions sum to one") {
        auto counts = ContextCounts::scan(repeat("abba", 25), kAb, 2);
        for (const char* text : {"a", "b", "ab", "a|a", "ab|b"}) {
            auto dist = predictive_distribution(counts, ctx(kAb, text), 0.5);
            double total = 0.0;
            for (double p : dist.probability) total += p;
            CHECK(std::abs(total - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("tree estimation on structured and structureless inputs") {
    SUBCASE("alternation estimates the depth-1 split") {
        EstimatorConfig config;
        config.max_depth = 2;
        auto model = estimate_tree(repeat("ab", 5000), kAb, config);
        CHECK(model.tree == tree_of(kAb, {"a", "b"}));
        CHECK(model.distribution_for(ctx(kAb, "a"))[1] > 0.99);
        CHECK(model.distribution_for(ctx(kAb, "b"))[0] > 0.99);
    }
    SUBCASE("period-4 input needs the sparse form: position -2 decides") {
        auto model = estimate_tree(repeat("aabb", 100), kAb, {});
        CHECK(model.tree == tree_of(kAb, {"a|ab", "b|ab"}));
    }
    SUBCASE("single-symbol input collapses to the root") {
        auto model = estimate_tree(std::string(1000, 'a'), kAb, {});
        CHECK(model.tree == SparseContextTree::root_tree(kAb));
    }
    SUBCASE("iid uniform input collapses to the root") {
        auto sequence = generate_sequence(flat_model(kAbcd), 100000, 404);
        auto model = estimate_tree(sequence, kAbcd, {});
        CHECK(model.tree == SparseContextTree::root_tree(kAbcd));
    }
    SUBCASE("too-short sequences are rejected") {
        CHECK_THROWS(estimate_tree("a", kAb, {}));
        CHECK_THROWS(estimate_tree("", kAb, {}));
    }
    SUBCASE("estimated trees validate as complete") {
        std::mt19937_64 rng(97);
        for (int i = 0; i < 5; ++i) {
            std::string s;
            for (int k = 0; k < 4000; ++k) {
                s.push_back("abcd"[rng() % (1 + i % 3 + 1)]);
            }
            auto model = estimate_tree(s, kAbcd, {});
            auto report = validate_tree(model.tree);
            CHECK(report.is_complete);
            CHECK(model.probabilities.size() == model.tree.contexts().size());
            for (const auto& p : model.probabilities) {
                double total = 0.0;
                for (double v : p) total += v;
                CHECK(std::abs(total - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("raising keep_threshold only coarsens the estimate") {
    // Fixed corpora: a planted 2-context source, a planted depth-2 source,
    // and an iid control.
    std::vector<std::string> corpora;
    {
        EstimatedModel source{tree_of(kAbcd, {"a", "bcd"}),
                              {{0.05, 0.8, 0.1, 0.05}, {0.6, 0.1, 0.1, 0.2}}};
        corpora.push_back(generate_sequence(source, 20000, 11));
        EstimatedModel deep{tree_of(kAbcd, {"ab|ab", "cd|ab", "cd"}),
                            {{0.7, 0.1, 0.1, 0.1},
                             {0.1, 0.1, 0.7, 0.1},
                             {0.25, 0.25, 0.25, 0.25}}};
        corpora.push_back(generate_sequence(deep, 20000, 12));
        corpora.push_back(generate_sequence(flat_model(kAbcd), 20000, 13));
    }

    EstimatorConfig config;
    config.max_depth = 3;
    for (const auto& sequence : corpora) {
        HistoryPartition previous;
        bool first = true;
        for (double r : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 1e6}) {
            config.keep_threshold = r;
            auto model = estimate_tree(sequence, kAbcd, config);
            auto partition = induced_partition(model.tree, config.max_depth);
            if (!first) {
                // The finer tree came from the smaller threshold.
                CHECK(partition_refines(previous, partition));
            }
            previous = partition;
            first = false;
        }
        // An absurd threshold keeps nothing: root tree.
        CHECK(previous.block_count == 1);
    }
}

TEST_CASE("sequence generation") {
    SUBCASE("degenerate root model emits its distribution from position 0") {
        EstimatedModel model{SparseContextTree::root_tree(kAbcd), {{1.0, 0.0, 0.0, 0.0}}};
        CHECK(generate_sequence(model, 12, 1) == "aaaaaaaaaaaa");
        CHECK(generate_sequence(model, 12, 999) == "aaaaaaaaaaaa");
    }
    SUBCASE("fixed seed reproduces the string") {
        auto model = flat_model(kAbcd);
        CHECK(generate_sequence(model, 500, 42) == generate_sequence(model, 500, 42));
        CHECK(generate_sequence(model, 500, 42) != generate_sequence(model, 500, 43));
    }
    SUBCASE("alternation model alternates after the warm-up draw") {
        EstimatedModel model{tree_of(kAb, {"a", "b"}), {{0.0, 1.0}, {1.0, 0.0}}};
        // The first position is ambiguous between the two contexts, so it is
        // a uniform draw; find a seed for each starting symbol.
        bool saw_a = false;
        bool saw_b = false;
        for (std::uint64_t seed = 0; seed < 32 && !(saw_a && saw_b); ++seed) {
            auto s = generate_sequence(model, 6, seed);
            if (s[0] == 'a') {
                CHECK(s == "ababab");
                saw_a = true;
            } else {
                CHECK(s == "bababa");
                saw_b = true;
            }
        }
        CHECK(saw_a);
        CHECK(saw_b);
    }
    SUBCASE("length below the warm-up is rejected") {
        EstimatedModel deep{tree_of(kAb, {"a|a", "b|a", "b"}),
                            {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}};
        CHECK_THROWS(generate_sequence(deep, 1, 7));
        CHECK(generate_sequence(deep, 2, 7).size() == 2);
    }
}

TEST_CASE("estimator round-trip recovers a planted sparse model") {
    EstimatedModel source{tree_of(kAbcd, {"a", "bcd"}),
                          {{0.05, 0.75, 0.1, 0.1}, {0.7, 0.1, 0.1, 0.1}}};
    auto sequence = generate_sequence(source, 100000, 7);
    auto model = estimate_tree(sequence, kAbcd, {});
    CHECK(partitions_equal(induced_partition(model.tree, 5),
                           induced_partition(source.tree, 5)));
}

TEST_CASE("batch estimation matches the serial reference") {
    std::vector<std::string> sequences;
    sequences.push_back(repeat("ab", 2000));
    sequences.push_back(repeat("aabb", 1000));
    sequences.push_back(generate_sequence(flat_model(kAb), 4000, 3));
    sequences.push_back(repeat("aab", 1500));

    auto parallel = estimate_all(sequences, kAb);
    auto serial = estimate_all_serial(sequences, kAb);
    REQUIRE(parallel.size() == serial.size());
    for (std::size_t i = 0; i < parallel.size(); ++i) {
        CHECK(parallel[i].tree == serial[i].tree);
        CHECK(parallel[i].probabilities == serial[i].probabilities);
    }

    SUBCASE("errors surface from the batch") {
        sequences.push_back("x");
        CHECK_THROWS(estimate_all(sequences, kAb));
    }
}

TEST_CASE("model serialization") {
    auto model = estimate_tree(repeat("aabb", 100), kAb, {});

    SUBCASE("round-trips through text") {
        auto text = serialize_model(model);
        auto parsed = parse_model(text);
        CHECK(parsed.tree == model.tree);
        REQUIRE(parsed.probabilities.size() == model.probabilities.size());
        for (std::size_t i = 0; i < parsed.probabilities.size(); ++i) {
            for (std::size_t a = 0; a < parsed.probabilities[i].size(); ++a) {
                CHECK(std::abs(parsed.probabilities[i][a] -
                               model.probabilities[i][a]) < 1e-6);
            }
        }
        CHECK(serialize_model(parsed) == text);
    }
    SUBCASE("config echo lands in the header comment") {
        EstimatorConfig config;
        auto text = serialize_model(model, &config);
        CHECK(text.find("# max_depth=5") == 0);
        CHECK(parse_model(text).tree == model.tree);
    }
    SUBCASE("missing or malformed probability lines are rejected") {
        CHECK_THROWS(parse_model("alphabet=ab\na\nb\na -> p(a)=0.5 p(b)=0.5\n"));
        CHECK_THROWS(parse_model(
            "alphabet=ab\na\nb\na -> p(a)=0.5 p(b)=0.5\nb -> p(a)=1.0\n"));
    }
}
