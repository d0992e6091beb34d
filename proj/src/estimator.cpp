#include "ctphy/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>

namespace ctphy {

namespace {

std::string format6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<double> smoothed_distribution(const std::vector<std::uint64_t>& trans,
                                          std::uint64_t total, double pseudocount,
                                          std::size_t n_symbols, bool* zero_support) {
    std::vector<double> p(n_symbols);
    if (zero_support) *zero_support = false;
    const double denom =
        pseudocount * static_cast<double>(n_symbols) + static_cast<double>(total);
    if (denom <= 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n_symbols));
        if (zero_support) *zero_support = true;
        return p;
    }
    for (std::size_t a = 0; a < n_symbols; ++a)
        p[a] = (pseudocount + static_cast<double>(trans[a])) / denom;
    return p;
}

double kl_bits(const std::vector<double>& p, const std::vector<double>& q) {
    double d = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] <= 0.0) continue;
        if (q[a] <= 0.0) return std::numeric_limits<double>::infinity();
        d += p[a] * std::log2(p[a] / q[a]);
    }
    return d;
}

double symmetrized_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    return kl_bits(p, q) + kl_bits(q, p);
}

}  // namespace

void EstimatorConfig::validate() const {
    if (max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
    if (min_count < 1) throw std::invalid_argument("min_count must be at least 1");
    if (!(merge_threshold >= 0.0))
        throw std::invalid_argument("merge_threshold must be nonnegative");
    if (!(keep_threshold >= 0.0))
        throw std::invalid_argument("keep_threshold must be nonnegative");
    if (!(pseudocount >= 0.0)) throw std::invalid_argument("pseudocount must be nonnegative");
}

ContextCounts ContextCounts::scan(std::string_view sequence, AlphabetPtr alphabet,
                                  std::size_t max_depth) {
    if (!alphabet) throw std::invalid_argument("scan without alphabet");
    if (max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
    if (sequence.size() < 2)
        throw std::runtime_error("sequence too short to scan (need at least 2 symbols)");

    ContextCounts cc;
    cc.alphabet_ = std::move(alphabet);
    cc.sequence_length_ = sequence.size();
    const std::size_t n_sym = cc.alphabet_->size();

    cc.powers_.resize(max_depth + 1);
    cc.powers_[0] = 1;
    for (std::size_t j = 1; j <= max_depth; ++j) {
        if (cc.powers_[j - 1] > std::numeric_limits<std::uint64_t>::max() / n_sym)
            throw std::invalid_argument("max_depth too large for this alphabet size");
        cc.powers_[j] = cc.powers_[j - 1] * n_sym;
    }

    std::vector<std::size_t> idx(sequence.size());
    for (std::size_t t = 0; t < sequence.size(); ++t) {
        char c = sequence[t];
        if (!cc.alphabet_->contains(c))
            throw std::runtime_error(std::string("symbol '") + c + "' at position " +
                                     std::to_string(t + 1) + " not in alphabet " +
                                     cc.alphabet_->symbols());
        idx[t] = cc.alphabet_->index_of(c);
    }

    cc.tables_.resize(max_depth + 1);
    // Depth 0: the empty suffix precedes every position.
    {
        DepthTable& t0 = cc.tables_[0];
        t0.index.emplace(0, 0);
        t0.occurrences.assign(1, static_cast<std::uint32_t>(sequence.size()));
        t0.next.assign(n_sym, 0);
        for (std::size_t t = 0; t < sequence.size(); ++t) ++t0.next[idx[t]];
    }

    auto row_id = [&](DepthTable& table, std::uint64_t code) {
        auto [it, inserted] = table.index.emplace(
            code, static_cast<std::uint32_t>(table.occurrences.size()));
        if (inserted) {
            table.occurrences.push_back(0);
            table.next.resize(table.next.size() + n_sym, 0);
        }
        return it->second;
    };

    // A suffix of length j ending at position e occupies e-j+1..e; it is
    // counted once there, and its transition to x_{e+1} only when that next
    // symbol exists.
    for (std::size_t e = 0; e < sequence.size(); ++e) {
        std::uint64_t code = 0;
        const std::size_t deepest = std::min(max_depth, e + 1);
        for (std::size_t j = 1; j <= deepest; ++j) {
            code += idx[e + 1 - j] * cc.powers_[j - 1];
            DepthTable& table = cc.tables_[j];
            std::uint32_t rid = row_id(table, code);
            ++table.occurrences[rid];
            if (e + 1 < sequence.size()) ++table.next[rid * n_sym + idx[e + 1]];
        }
    }
    return cc;
}

ContextCounts::Row ContextCounts::row(std::size_t depth, std::uint64_t code) const {
    if (depth >= tables_.size()) return {};
    const DepthTable& table = tables_[depth];
    auto it = table.index.find(code);
    if (it == table.index.end()) return {};
    return {table.occurrences[it->second], &table.next[it->second * alphabet_->size()]};
}

std::uint64_t ContextCounts::extend_code(std::uint64_t code, std::size_t depth,
                                         std::size_t symbol_index) const {
    return code + symbol_index * powers_.at(depth);
}

std::uint64_t ContextCounts::occurrences(std::string_view u) const {
    if (u.size() > max_depth())
        throw std::invalid_argument("suffix deeper than scanned depth");
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        code += alphabet_->index_of(u[u.size() - 1 - i]) * powers_[i];
    return row(u.size(), code).occurrences;
}

std::uint64_t ContextCounts::transitions(std::string_view u, char next) const {
    if (u.size() > max_depth())
        throw std::invalid_argument("suffix deeper than scanned depth");
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        code += alphabet_->index_of(u[u.size() - 1 - i]) * powers_[i];
    Row r = row(u.size(), code);
    return r.next ? r.next[alphabet_->index_of(next)] : 0;
}

PredictiveDistribution predictive_distribution(const ContextCounts& counts,
                                               const SparseContext& context,
                                               double pseudocount) {
    if (context.alphabet() != counts.alphabet())
        throw std::invalid_argument("predictive_distribution: alphabet mismatch");
    if (!(pseudocount >= 0.0))
        throw std::invalid_argument("pseudocount must be nonnegative");
    const std::size_t l = context.length();
    if (l > counts.max_depth())
        throw std::invalid_argument("context deeper than scanned depth");
    const std::size_t n_sym = counts.alphabet().size();

    std::vector<std::uint64_t> trans(n_sym, 0);
    std::uint64_t total = 0;
    for (const auto& [code, rid] : counts.codes_at(l)) {
        std::uint64_t rest = code;
        bool compatible = true;
        for (std::size_t i = 0; i < l && compatible; ++i) {
            compatible = context.set(i).contains(rest % n_sym);
            rest /= n_sym;
        }
        if (!compatible) continue;
        ContextCounts::Row r = counts.row(l, code);
        for (std::size_t a = 0; a < n_sym; ++a) {
            trans[a] += r.next[a];
            total += r.next[a];
        }
    }

    PredictiveDistribution out;
    out.probability =
        smoothed_distribution(trans, total, pseudocount, n_sym, &out.zero_support);
    return out;
}

const std::vector<double>& EstimatedModel::distribution_for(
    const SparseContext& context) const {
    for (std::size_t i = 0; i < tree.size(); ++i)
        if (tree.contexts()[i] == context) return probabilities[i];
    throw std::invalid_argument("context not in model: " + context.to_text());
}

namespace {

// One sibling group during estimation: a set of extension symbols at the
// node's next-deeper position, with pooled counts over the plain suffixes
// compatible with the group.
struct Group {
    SymbolSet symbols;
    std::size_t min_symbol = 0;
    std::vector<std::uint64_t> codes;  // compatible suffix codes, one level deeper
    std::vector<std::uint64_t> trans;
    std::uint64_t total = 0;
    std::uint64_t occurrences = 0;
    std::vector<double> dist;
};

struct TreeBuilder {
    const ContextCounts& counts;
    const EstimatorConfig& cfg;
    const AlphabetPtr& alphabet;
    std::vector<SparseContext> leaves;

    // path holds the group sets from w_{-1} down to w_{-depth}. Pruning is
    // bottom-up: a group whose subtree kept contexts of its own stays as
    // interior structure no matter its local gain, so an uninformative
    // position never hides an informative deeper one. A childless group
    // survives only when its divergence gain against this node clears the
    // threshold; it then contributes path as a context. Dropped regions are
    // filled in by completion afterwards. Returns whether anything below
    // this node survived.
    bool build(std::vector<SymbolSet>& path, std::size_t depth,
               const std::vector<std::uint64_t>& suffix_codes,
               const std::vector<double>& node_dist) {
        if (depth >= cfg.max_depth) return false;
        bool any = false;
        for (const Group& g : merged_children(depth, suffix_codes)) {
            path.push_back(g.symbols);
            if (build(path, depth + 1, g.codes, g.dist)) {
                any = true;
            } else {
                // Divergence gain of the child against this node, bits*count.
                double gain = kl_bits(g.dist, node_dist) * static_cast<double>(g.total);
                if (gain >= cfg.keep_threshold) {
                    leaves.emplace_back(alphabet, path);
                    any = true;
                }
            }
            path.pop_back();
        }
        return any;
    }

    std::vector<Group> merged_children(std::size_t depth,
                                       const std::vector<std::uint64_t>& suffix_codes) {
        const std::size_t n_sym = alphabet->size();
        std::vector<Group> groups;
        for (std::size_t a = 0; a < n_sym; ++a) {
            Group g;
            g.symbols = SymbolSet::single(a);
            g.min_symbol = a;
            g.trans.assign(n_sym, 0);
            for (std::uint64_t u : suffix_codes) {
                std::uint64_t code = counts.extend_code(u, depth, a);
                ContextCounts::Row r = counts.row(depth + 1, code);
                if (r.occurrences == 0) continue;
                g.codes.push_back(code);
                g.occurrences += r.occurrences;
                for (std::size_t b = 0; b < n_sym; ++b) {
                    g.trans[b] += r.next[b];
                    g.total += r.next[b];
                }
            }
            if (g.occurrences >= cfg.min_count) groups.push_back(std::move(g));
        }
        for (Group& g : groups)
            g.dist = smoothed_distribution(g.trans, g.total, cfg.pseudocount, n_sym, nullptr);

        // Agglomerative: merge the closest pair while it clears the
        // threshold. Groups stay ordered by smallest member symbol, so equal
        // divergences resolve toward the alphabetically first pair.
        while (groups.size() >= 2) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t bi = 0, bj = 0;
            for (std::size_t i = 0; i < groups.size(); ++i)
                for (std::size_t j = i + 1; j < groups.size(); ++j) {
                    double d = symmetrized_divergence(groups[i].dist, groups[j].dist);
                    if (d < best) {
                        best = d;
                        bi = i;
                        bj = j;
                    }
                }
            if (!(best <= cfg.merge_threshold)) break;
            Group& gi = groups[bi];
            Group& gj = groups[bj];
            gi.symbols = gi.symbols | gj.symbols;
            std::vector<std::uint64_t> merged_codes;
            merged_codes.reserve(gi.codes.size() + gj.codes.size());
            std::merge(gi.codes.begin(), gi.codes.end(), gj.codes.begin(), gj.codes.end(),
                       std::back_inserter(merged_codes));
            gi.codes = std::move(merged_codes);
            for (std::size_t b = 0; b < gi.trans.size(); ++b) gi.trans[b] += gj.trans[b];
            gi.total += gj.total;
            gi.occurrences += gj.occurrences;
            gi.dist = smoothed_distribution(gi.trans, gi.total, cfg.pseudocount,
                                            gi.trans.size(), nullptr);
            groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(bj));
        }
        return groups;
    }
};

}  // namespace

EstimatedModel estimate_tree(std::string_view sequence, AlphabetPtr alphabet,
                             const EstimatorConfig& config) {
    config.validate();
    if (!alphabet) throw std::invalid_argument("estimate_tree without alphabet");
    if (sequence.size() < std::max<std::size_t>(2, config.min_count))
        throw std::runtime_error("sequence too short to estimate from");

    ContextCounts counts = ContextCounts::scan(sequence, alphabet, config.max_depth);

    ContextCounts::Row root = counts.row(0, 0);
    std::vector<std::uint64_t> root_trans(alphabet->size());
    std::uint64_t root_total = 0;
    for (std::size_t a = 0; a < alphabet->size(); ++a) {
        root_trans[a] = root.next[a];
        root_total += root.next[a];
    }
    std::vector<double> root_dist = smoothed_distribution(
        root_trans, root_total, config.pseudocount, alphabet->size(), nullptr);

    TreeBuilder builder{counts, config, alphabet, {}};
    std::vector<SymbolSet> path;
    builder.build(path, 0, {0}, root_dist);

    SparseContextTree tree(alphabet, std::move(builder.leaves));
    if (!validate_tree(tree).is_consistent)
        throw std::logic_error("estimator produced overlapping contexts");
    tree = auto_complete(tree);

    EstimatedModel model{std::move(tree), {}};
    model.probabilities.reserve(model.tree.size());
    for (const SparseContext& c : model.tree.contexts())
        model.probabilities.push_back(
            predictive_distribution(counts, c, config.pseudocount).probability);
    return model;
}

std::vector<EstimatedModel> estimate_all(const std::vector<std::string>& sequences,
                                         AlphabetPtr alphabet,
                                         const EstimatorConfig& config) {
    std::vector<std::optional<EstimatedModel>> slots(sequences.size());
    std::mutex error_mutex;
    std::string first_error;
    bool failed = false;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(sequences.size()); ++i) {
        try {
            slots[static_cast<std::size_t>(i)] =
                estimate_tree(sequences[static_cast<std::size_t>(i)], alphabet, config);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!failed) {
                failed = true;
                first_error = "sequence " + std::to_string(i + 1) + ": " + e.what();
            }
        }
    }
    if (failed) throw std::runtime_error(first_error);
    std::vector<EstimatedModel> out;
    out.reserve(slots.size());
    for (auto& slot : slots) out.push_back(std::move(*slot));
    return out;
}

std::vector<EstimatedModel> estimate_all_serial(const std::vector<std::string>& sequences,
                                                AlphabetPtr alphabet,
                                                const EstimatorConfig& config) {
    std::vector<EstimatedModel> out;
    out.reserve(sequences.size());
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        try {
            out.push_back(estimate_tree(sequences[i], alphabet, config));
        } catch (const std::exception& e) {
            throw std::runtime_error("sequence " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::string generate_sequence(const EstimatedModel& model, std::size_t length,
                              std::uint64_t seed) {
    const SparseContextTree& tree = model.tree;
    const Alphabet& alpha = tree.alphabet();
    if (tree.empty()) throw std::invalid_argument("generate_sequence: empty model");
    if (model.probabilities.size() != tree.size())
        throw std::invalid_argument("generate_sequence: model misses distributions");
    const std::size_t warmup = tree.max_depth();
    if (length < warmup)
        throw std::invalid_argument("generate_sequence: length shorter than model depth");

    std::mt19937_64 rng(seed);
    // Implementation-defined std::*_distribution is avoided on purpose:
    // generated corpora must be reproducible from the seed alone.
    auto uniform01 = [&rng]() { return double(rng() >> 11) * 0x1.0p-53; };

    std::vector<std::size_t> history;
    history.reserve(length);
    for (std::size_t t = 0; t < length; ++t) {
        // Contexts whose constraints hold over the available history. Early
        // positions may not pin the context down; those warm-up draws fall
        // back to the uniform distribution. From max_depth on this is exact
        // matching, where completeness + consistency promise a unique hit.
        std::size_t match = tree.size();
        std::size_t n_matches = 0;
        for (std::size_t i = 0; i < tree.size(); ++i) {
            const auto& sets = tree.contexts()[i].sets();
            const std::size_t reach = std::min(sets.size(), t);
            bool ok = true;
            for (std::size_t k = 0; ok && k < reach; ++k) {
                ok = sets[k].contains(history[t - 1 - k]);
            }
            if (ok) {
                match = i;
                ++n_matches;
            }
        }
        if (n_matches == 0 || (t >= warmup && n_matches != 1))
            throw std::logic_error("generate_sequence: history matches " +
                                   std::to_string(n_matches) + " contexts (want 1)");
        std::size_t pick;
        if (n_matches > 1) {
            auto k = static_cast<std::size_t>(uniform01() * double(alpha.size()));
            pick = std::min(k, alpha.size() - 1);
        } else {
            const std::vector<double>& p = model.probabilities[match];
            double total = 0.0;
            for (double v : p) total += v;
            double u = uniform01() * total;
            pick = alpha.size() - 1;
            double acc = 0.0;
            for (std::size_t a = 0; a < p.size(); ++a) {
                acc += p[a];
                if (u < acc) {
                    pick = a;
                    break;
                }
            }
        }
        history.push_back(pick);
    }

    std::string out;
    out.reserve(history.size());
    for (std::size_t k : history) out.push_back(alpha.symbol(k));
    return out;
}

std::string serialize_model(const EstimatedModel& model, const EstimatorConfig* config) {
    std::string out;
    if (config) {
        out += "# max_depth=" + std::to_string(config->max_depth) +
               " min_count=" + std::to_string(config->min_count) +
               " merge_threshold=" + format6(config->merge_threshold) +
               " keep_threshold=" + format6(config->keep_threshold) +
               " pseudocount=" + format6(config->pseudocount) + "\n";
    }
    out += serialize_tree(model.tree);
    const Alphabet& alpha = model.tree.alphabet();
    for (std::size_t i = 0; i < model.tree.size(); ++i) {
        out += model.tree.contexts()[i].to_text() + " ->";
        for (std::size_t a = 0; a < alpha.size(); ++a) {
            out += " p(";
            out.push_back(alpha.symbol(a));
            out += ")=" + format6(model.probabilities[i][a]);
        }
        out.push_back('\n');
    }
    return out;
}

EstimatedModel parse_model(std::string_view text) {
    AlphabetPtr alphabet;
    std::vector<SparseContext> contexts;
    std::vector<std::pair<std::string, std::vector<double>>> prob_lines;

    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        auto fail = [&](const std::string& why) {
            throw std::runtime_error("model text line " + std::to_string(line_no) + ": " +
                                     why);
        };
        if (!line.empty() && line.front() != '#') {
            if (!alphabet) {
                if (line.rfind("alphabet=", 0) != 0) fail("expected alphabet= header");
                alphabet = make_alphabet(line.substr(9));
            } else if (std::size_t arrow = line.find(" -> "); arrow != std::string_view::npos) {
                std::string ctx_text(line.substr(0, arrow));
                std::vector<double> p(alphabet->size(),
                                      std::numeric_limits<double>::quiet_NaN());
                std::string_view rest = line.substr(arrow + 4);
                std::size_t cursor = 0;
                std::size_t seen = 0;
                while (cursor < rest.size()) {
                    while (cursor < rest.size() && rest[cursor] == ' ') ++cursor;
                    if (cursor >= rest.size()) break;
                    if (cursor + 4 >= rest.size() || rest[cursor] != 'p' ||
                        rest[cursor + 1] != '(' || rest[cursor + 3] != ')' ||
                        rest[cursor + 4] != '=')
                        fail("malformed probability entry");
                    std::size_t a = alphabet->index_of(rest[cursor + 2]);
                    cursor += 5;
                    std::size_t end = cursor;
                    while (end < rest.size() && rest[end] != ' ') ++end;
                    try {
                        p[a] = std::stod(std::string(rest.substr(cursor, end - cursor)));
                    } catch (const std::exception&) {
                        fail("bad probability value");
                    }
                    ++seen;
                    cursor = end;
                }
                if (seen != alphabet->size())
                    fail("probability line must cover every alphabet symbol");
                prob_lines.emplace_back(std::move(ctx_text), std::move(p));
            } else {
                contexts.push_back(SparseContext::from_text(line, alphabet));
            }
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    if (!alphabet) throw std::runtime_error("model text: missing alphabet= header");

    SparseContextTree tree(alphabet, std::move(contexts));
    EstimatedModel model{std::move(tree), {}};
    model.probabilities.resize(model.tree.size());
    std::vector<bool> filled(model.tree.size(), false);
    for (auto& [ctx_text, p] : prob_lines) {
        SparseContext c = SparseContext::from_text(ctx_text, alphabet);
        bool found = false;
        for (std::size_t i = 0; i < model.tree.size(); ++i) {
            if (model.tree.contexts()[i] == c) {
                model.probabilities[i] = std::move(p);
                filled[i] = true;
                found = true;
                break;
            }
        }
        if (!found)
            throw std::runtime_error("model text: probability line for unknown context " +
                                     ctx_text);
    }
    for (std::size_t i = 0; i < filled.size(); ++i)
        if (!filled[i])
            throw std::runtime_error("model text: context without distribution: " +
                                     model.tree.contexts()[i].to_text());
    return model;
}

}  // namespace ctphy
