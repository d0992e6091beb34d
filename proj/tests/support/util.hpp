// Small construction helpers shared by the test binaries.

#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "ctphy/tree.hpp"

namespace ctphy::testsupport {

inline SparseContext ctx(const AlphabetPtr& alphabet, std::string_view text) {
    return SparseContext::from_text(text, alphabet);
}

inline SparseContextTree tree_of(const AlphabetPtr& alphabet,
                                 std::initializer_list<const char*> texts) {
    std::vector<SparseContext> contexts;
    for (const char* text : texts) contexts.push_back(ctx(alphabet, text));
    return SparseContextTree(alphabet, std::move(contexts));
}

}  // namespace ctphy::testsupport
