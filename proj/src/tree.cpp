#include "ctphy/tree.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace ctphy {

namespace {

using BigInt = boost::multiprecision::cpp_int;

void require_same_alphabet(const Alphabet& a, const Alphabet& b, const char* what) {
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": alphabet mismatch (" +
                                    a.symbols() + " vs " + b.symbols() + ")");
}

}  // namespace

double to_double(const Rational& r) { return r.convert_to<double>(); }

SparseContext::SparseContext(AlphabetPtr alphabet, std::vector<SymbolSet> recent_first)
    : alphabet_(std::move(alphabet)), sets_(std::move(recent_first)) {
    if (!alphabet_) throw std::invalid_argument("context without alphabet");
    if (sets_.empty()) throw std::invalid_argument("context needs at least one position");
    const SymbolSet full = SymbolSet::full(*alphabet_);
    for (const SymbolSet& s : sets_) {
        if (s.empty()) throw std::invalid_argument("empty symbol set in context");
        if (!s.is_subset_of(full))
            throw std::invalid_argument("symbol set outside alphabet " +
                                        alphabet_->symbols());
    }
}

std::string SparseContext::to_text() const {
    std::string out;
    for (std::size_t i = sets_.size(); i-- > 0;) {
        out += sets_[i].to_string(*alphabet_);
        if (i != 0) out.push_back('|');
    }
    return out;
}

SparseContext SparseContext::from_text(std::string_view text, AlphabetPtr alphabet) {
    if (!alphabet) throw std::invalid_argument("context without alphabet");
    std::vector<SymbolSet> deepest_first;
    std::size_t start = 0;
    while (true) {
        std::size_t bar = text.find('|', start);
        std::string_view tok = text.substr(
            start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
        if (tok.empty())
            throw std::invalid_argument("empty symbol set in context '" + std::string(text) +
                                        "'");
        deepest_first.push_back(SymbolSet::from_symbols(tok, *alphabet));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    std::vector<SymbolSet> recent_first(deepest_first.rbegin(), deepest_first.rend());
    return SparseContext(std::move(alphabet), std::move(recent_first));
}

bool SparseContext::matches(const std::vector<std::size_t>& history) const {
    if (history.size() < sets_.size()) return false;
    for (std::size_t i = 0; i < sets_.size(); ++i)
        if (!sets_[i].contains(history[history.size() - 1 - i])) return false;
    return true;
}

Rational context_weight(const SparseContext& w) {
    BigInt span = 1;
    for (const SymbolSet& s : w.sets()) span *= s.count();
    BigInt denom = 1;
    for (std::size_t i = 0; i < w.length(); ++i) denom *= w.alphabet().size();
    return Rational(span, denom);
}

std::optional<SparseContext> context_intersect(const SparseContext& w,
                                               const SparseContext& v) {
    require_same_alphabet(w.alphabet(), v.alphabet(), "context_intersect");
    const SparseContext& shorter = w.length() <= v.length() ? w : v;
    const SparseContext& longer = w.length() <= v.length() ? v : w;
    std::vector<SymbolSet> sets;
    sets.reserve(longer.length());
    for (std::size_t i = 0; i < shorter.length(); ++i) {
        SymbolSet m = shorter.set(i) & longer.set(i);
        if (m.empty()) return std::nullopt;
        sets.push_back(m);
    }
    for (std::size_t i = shorter.length(); i < longer.length(); ++i)
        sets.push_back(longer.set(i));
    return SparseContext(w.alphabet_ptr(), std::move(sets));
}

SparseContextTree::SparseContextTree(AlphabetPtr alphabet,
                                     std::vector<SparseContext> contexts)
    : alphabet_(std::move(alphabet)), contexts_(std::move(contexts)) {
    if (!alphabet_) throw std::invalid_argument("tree without alphabet");
    for (const SparseContext& c : contexts_)
        require_same_alphabet(*alphabet_, c.alphabet(), "tree construction");
    // Canonical order: lexicographic by the context text form.
    std::vector<std::pair<std::string, std::size_t>> keyed;
    keyed.reserve(contexts_.size());
    for (std::size_t i = 0; i < contexts_.size(); ++i)
        keyed.emplace_back(contexts_[i].to_text(), i);
    std::sort(keyed.begin(), keyed.end());
    std::vector<SparseContext> ordered;
    ordered.reserve(contexts_.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        if (i > 0 && keyed[i].first == keyed[i - 1].first) continue;  // dedup
        ordered.push_back(std::move(contexts_[keyed[i].second]));
    }
    contexts_ = std::move(ordered);
}

SparseContextTree SparseContextTree::root_tree(AlphabetPtr alphabet) {
    std::vector<SymbolSet> sets{SymbolSet::full(*alphabet)};
    std::vector<SparseContext> ctx;
    ctx.emplace_back(alphabet, std::move(sets));
    return SparseContextTree(std::move(alphabet), std::move(ctx));
}

std::size_t SparseContextTree::max_depth() const noexcept {
    std::size_t d = 0;
    for (const SparseContext& c : contexts_) d = std::max(d, c.length());
    return d;
}

ValidationReport validate_tree(const SparseContextTree& tree) {
    ValidationReport report;
    const auto& ctx = tree.contexts();
    // Two distinct contexts are compatible exactly when some aligned position
    // within the shorter length has an empty set intersection; otherwise
    // their history cylinders overlap.
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        for (std::size_t j = i + 1; j < ctx.size(); ++j) {
            std::size_t common = std::min(ctx[i].length(), ctx[j].length());
            bool separated = false;
            for (std::size_t p = 0; p < common && !separated; ++p)
                separated = (ctx[i].set(p) & ctx[j].set(p)).empty();
            if (!separated) {
                report.is_consistent = false;
                report.overlaps.push_back({i, j});
            }
        }
    }
    for (const SparseContext& c : ctx) report.coverage += context_weight(c);
    report.is_complete = report.is_consistent && report.coverage == 1;
    return report;
}

SparseContextTree tree_join(const SparseContextTree& a, const SparseContextTree& b) {
    require_same_alphabet(a.alphabet(), b.alphabet(), "tree_join");
    std::vector<SparseContext> out;
    out.reserve(a.size() + b.size());
    for (const SparseContext& w : a.contexts())
        for (const SparseContext& v : b.contexts())
            if (auto m = context_intersect(w, v)) out.push_back(std::move(*m));
    return SparseContextTree(a.alphabet_ptr(), std::move(out));
}

namespace {

// Recursive completion. A cell is a candidate context built from atoms: at
// depth m+1 the alphabet is split into the equivalence classes generated by
// the relevant contexts' sets at that position, so every surviving context
// either contains the cell positionwise or is disjoint from it. A cell with
// no relevant context left is exactly an uncovered region and becomes a new
// context; a relevant context no deeper than the cell covers it entirely.
struct Completer {
    const AlphabetPtr& alphabet;
    std::vector<SparseContext>& added;

    void descend(std::vector<SymbolSet>& cell,
                 const std::vector<const SparseContext*>& relevant) {
        const std::size_t m = cell.size();
        if (relevant.empty()) {
            if (m == 0) {
                std::vector<SymbolSet> root{SymbolSet::full(*alphabet)};
                added.emplace_back(alphabet, std::move(root));
            } else {
                added.emplace_back(alphabet, cell);
            }
            return;
        }
        for (const SparseContext* w : relevant)
            if (w->length() <= m) return;  // cell covered
        // Atoms at position -(m+1): successively split the full set by each
        // relevant context's set there. Order is deterministic.
        std::vector<SymbolSet> atoms{SymbolSet::full(*alphabet)};
        for (const SparseContext* w : relevant) {
            const SymbolSet s = w->set(m);
            std::vector<SymbolSet> next;
            next.reserve(atoms.size() + 1);
            for (SymbolSet atom : atoms) {
                SymbolSet inside = atom & s;
                SymbolSet outside = SymbolSet::from_mask(atom.mask() & ~s.mask());
                if (!inside.empty()) next.push_back(inside);
                if (!outside.empty()) next.push_back(outside);
            }
            atoms = std::move(next);
        }
        for (SymbolSet atom : atoms) {
            std::vector<const SparseContext*> sub;
            for (const SparseContext* w : relevant)
                if (!(w->set(m) & atom).empty()) sub.push_back(w);
            cell.push_back(atom);
            descend(cell, sub);
            cell.pop_back();
        }
    }
};

}  // namespace

SparseContextTree auto_complete(const SparseContextTree& tree) {
    ValidationReport report = validate_tree(tree);
    if (!report.is_consistent)
        throw std::invalid_argument("auto_complete: tree has overlapping contexts");
    if (report.is_complete) return tree;

    std::vector<SparseContext> contexts = tree.contexts();
    std::vector<const SparseContext*> relevant;
    relevant.reserve(contexts.size());
    for (const SparseContext& c : contexts) relevant.push_back(&c);

    std::vector<SparseContext> added;
    Completer completer{tree.alphabet_ptr(), added};
    std::vector<SymbolSet> cell;
    completer.descend(cell, relevant);

    for (SparseContext& c : added) contexts.push_back(std::move(c));
    SparseContextTree out(tree.alphabet_ptr(), std::move(contexts));
    ValidationReport check = validate_tree(out);
    if (!check.is_complete)
        throw std::logic_error("auto_complete: completion did not reach coverage 1");
    return out;
}

SparseContextTree canonicalize(SparseContextTree tree) { return tree; }

std::string serialize_tree(const SparseContextTree& tree) {
    std::string out = "alphabet=" + tree.alphabet().symbols() + "\n";
    for (const SparseContext& c : tree.contexts()) {
        out += c.to_text();
        out.push_back('\n');
    }
    return out;
}

SparseContextTree parse_tree(std::string_view text) {
    AlphabetPtr alphabet;
    std::vector<SparseContext> contexts;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty() && line.front() != '#') {
            if (!alphabet) {
                if (line.rfind("alphabet=", 0) != 0)
                    throw std::runtime_error("tree text line " + std::to_string(line_no) +
                                             ": expected alphabet= header");
                alphabet = make_alphabet(line.substr(9));
            } else {
                contexts.push_back(SparseContext::from_text(line, alphabet));
            }
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    if (!alphabet) throw std::runtime_error("tree text: missing alphabet= header");
    return SparseContextTree(std::move(alphabet), std::move(contexts));
}

}  // namespace ctphy
