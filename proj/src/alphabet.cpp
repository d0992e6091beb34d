#include "ctphy/alphabet.hpp"

#include <bit>
#include <stdexcept>

namespace ctphy {

Alphabet::Alphabet(std::string_view symbols) {
    if (symbols.size() < 2)
        throw std::invalid_argument("alphabet needs at least 2 symbols");
    if (symbols.size() > kMaxSymbols)
        throw std::invalid_argument("alphabet exceeds " + std::to_string(kMaxSymbols) +
                                    " symbols");
    index_.fill(-1);
    symbols_.reserve(symbols.size());
    for (char c : symbols) {
        auto u = static_cast<unsigned char>(c);
        if (u <= 0x20 || u >= 0x7f || c == '|')
            throw std::invalid_argument(std::string("alphabet symbol not allowed: '") + c +
                                        "'");
        if (index_[u] >= 0)
            throw std::invalid_argument(std::string("duplicate alphabet symbol: '") + c + "'");
        index_[u] = static_cast<std::int8_t>(symbols_.size());
        symbols_.push_back(c);
    }
}

Alphabet Alphabet::protein() { return Alphabet("ACDEFGHIKLMNPQRSTVWY"); }

Alphabet Alphabet::dna() { return Alphabet("ACGT"); }

char Alphabet::symbol(std::size_t index) const {
    if (index >= symbols_.size()) throw std::out_of_range("symbol index out of range");
    return symbols_[index];
}

std::size_t Alphabet::index_of(char c) const {
    int i = index_[static_cast<unsigned char>(c)];
    if (i < 0)
        throw std::invalid_argument(std::string("symbol '") + c + "' not in alphabet " +
                                    symbols_);
    return static_cast<std::size_t>(i);
}

AlphabetPtr make_alphabet(std::string_view symbols) {
    return std::make_shared<const Alphabet>(symbols);
}

SymbolSet SymbolSet::from_symbols(std::string_view members, const Alphabet& a) {
    SymbolSet s;
    for (char c : members) s.mask_ |= std::uint64_t{1} << a.index_of(c);
    return s;
}

std::size_t SymbolSet::count() const noexcept { return std::popcount(mask_); }

std::string SymbolSet::to_string(const Alphabet& a) const {
    std::string out;
    out.reserve(count());
    for (std::size_t i = 0; i < a.size(); ++i)
        if (contains(i)) out.push_back(a.symbol(i));
    return out;
}

}  // namespace ctphy
