#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace ctphy {

// Fixed, ordered symbol alphabet. The symbol order is the canonical order used
// everywhere downstream (set serialization, context sorting), so an alphabet
// must not change once trees have been built over it. Symbols are printable
// ASCII characters excluding '|' (reserved by the context text format).
class Alphabet {
public:
    // Bitmask representation of symbol sets caps the alphabet size.
    static constexpr std::size_t kMaxSymbols = 64;

    explicit Alphabet(std::string_view symbols);

    static Alphabet protein();  // the 20 standard amino-acid letters
    static Alphabet dna();      // ACGT

    std::size_t size() const noexcept { return symbols_.size(); }
    char symbol(std::size_t index) const;
    const std::string& symbols() const noexcept { return symbols_; }

    bool contains(char c) const noexcept {
        return index_[static_cast<unsigned char>(c)] >= 0;
    }
    // Throws std::invalid_argument for symbols outside the alphabet.
    std::size_t index_of(char c) const;

    friend bool operator==(const Alphabet& a, const Alphabet& b) noexcept {
        return a.symbols_ == b.symbols_;
    }
    friend bool operator!=(const Alphabet& a, const Alphabet& b) noexcept {
        return !(a == b);
    }

private:
    std::string symbols_;
    std::array<std::int8_t, 256> index_{};
};

// Alphabets are immutable and shared between contexts, trees and models.
using AlphabetPtr = std::shared_ptr<const Alphabet>;

AlphabetPtr make_alphabet(std::string_view symbols);

// Subset of an alphabet's symbols, stored as a bitmask over symbol indices.
// Default-constructed sets are empty; contexts and trees only ever hold
// nonempty sets, but empty values occur transiently (failed intersections).
class SymbolSet {
public:
    SymbolSet() = default;

    static SymbolSet from_mask(std::uint64_t mask) noexcept {
        SymbolSet s;
        s.mask_ = mask;
        return s;
    }
    // Parses members like "ac"; throws on symbols outside the alphabet.
    static SymbolSet from_symbols(std::string_view members, const Alphabet& a);
    static SymbolSet full(const Alphabet& a) noexcept {
        return from_mask(a.size() == kMaskBits ? ~std::uint64_t{0}
                                               : (std::uint64_t{1} << a.size()) - 1);
    }
    static SymbolSet single(std::size_t symbol_index) noexcept {
        return from_mask(std::uint64_t{1} << symbol_index);
    }

    std::uint64_t mask() const noexcept { return mask_; }
    std::size_t count() const noexcept;
    bool empty() const noexcept { return mask_ == 0; }
    bool contains(std::size_t symbol_index) const noexcept {
        return (mask_ >> symbol_index) & 1u;
    }
    bool is_full(const Alphabet& a) const noexcept { return mask_ == full(a).mask_; }
    bool is_subset_of(SymbolSet other) const noexcept {
        return (mask_ & ~other.mask_) == 0;
    }

    friend SymbolSet operator&(SymbolSet a, SymbolSet b) noexcept {
        return from_mask(a.mask_ & b.mask_);
    }
    friend SymbolSet operator|(SymbolSet a, SymbolSet b) noexcept {
        return from_mask(a.mask_ | b.mask_);
    }
    friend bool operator==(SymbolSet a, SymbolSet b) noexcept { return a.mask_ == b.mask_; }
    friend bool operator!=(SymbolSet a, SymbolSet b) noexcept { return a.mask_ != b.mask_; }

    // Members in alphabet order, e.g. "ac".
    std::string to_string(const Alphabet& a) const;

private:
    static constexpr std::size_t kMaskBits = 64;
    std::uint64_t mask_ = 0;
};

}  // namespace ctphy
