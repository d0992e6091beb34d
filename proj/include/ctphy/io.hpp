#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ctphy/entropy.hpp"

namespace ctphy {

struct SequenceRecord {
    std::string id;        // first whitespace-delimited token of the header
    std::string residues;  // uppercased, gap characters '-' and '.' removed
};

// Standard FASTA with multi-line sequences. Errors on missing/duplicate ids,
// sequence data before the first header, records left empty after gap
// removal, and files without records.
std::vector<SequenceRecord> parse_fasta_text(std::string_view text);
std::vector<SequenceRecord> parse_fasta(const std::filesystem::path& path);

// Alphabet specification accepted by the CLI: "infer" (sorted set of symbols
// observed across the records), "protein", "dna", or an explicit symbol
// string such as "ACGT".
AlphabetPtr resolve_alphabet(std::string_view spec,
                             const std::vector<SequenceRecord>& records);

// PHYLIP square matrix. Writing puts the taxon count on the first line, then
// per row a name left-justified in a strict 10-character field (padded or
// truncated) followed by 6-decimal values; truncation collisions are an
// error. Reading accepts values wrapped onto continuation lines, averages
// asymmetries up to 1e-6 and rejects larger ones.
std::string format_phylip(const DistanceMatrix& matrix);
DistanceMatrix parse_phylip(std::string_view text);
void write_phylip_matrix(const std::filesystem::path& path, const DistanceMatrix& matrix);
DistanceMatrix read_phylip_matrix(const std::filesystem::path& path);

// Row-aligned view of two matrices over the same taxa, for scatter plots and
// regressions; rows ordered by sorted label pairs (i < j).
struct PairedDistances {
    struct Row {
        std::string taxon_i;
        std::string taxon_j;
        double first = 0.0;
        double second = 0.0;
    };
    std::vector<Row> rows;
};

// Matches taxa by label, order-independent; throws on taxon set mismatch,
// naming the symmetric difference.
PairedDistances compare_matrices(const DistanceMatrix& first,
                                 const DistanceMatrix& second);

// CSV with header "taxon_i,taxon_j,d1,d2", 6-decimal values.
std::string paired_csv(const PairedDistances& paired);

// Whole-file helpers; writes go through a temp file in the target directory
// plus an atomic rename, so readers never observe partial output.
std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Filesystem-safe record id: path separators and other unsafe characters
// become '_'. Used for per-record output filenames.
std::string sanitize_filename(std::string_view id);

}  // namespace ctphy
