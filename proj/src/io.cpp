#include "ctphy/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace ctphy {

namespace {

std::string format6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

constexpr std::size_t kPhylipNameWidth = 10;
constexpr double kSymmetryTolerance = 1e-6;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<SequenceRecord> parse_fasta_text(std::string_view text) {
    std::vector<SequenceRecord> records;
    std::unordered_set<std::string> ids;
    bool in_record = false;

    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (!line.empty() && line.front() == '>') {
            std::string_view header = trim(line.substr(1));
            std::size_t space = header.find_first_of(" \t");
            std::string id(space == std::string_view::npos ? header
                                                           : header.substr(0, space));
            if (id.empty())
                throw std::runtime_error("FASTA line " + std::to_string(line_no) +
                                         ": record without id");
            if (!ids.insert(id).second)
                throw std::runtime_error("FASTA: duplicate record id '" + id + "'");
            records.push_back({std::move(id), {}});
            in_record = true;
        } else if (!trim(line).empty()) {
            if (!in_record)
                throw std::runtime_error("FASTA line " + std::to_string(line_no) +
                                         ": sequence data before the first '>' header");
            for (char c : trim(line)) {
                if (c == '-' || c == '.') continue;
                records.back().residues.push_back(
                    static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
            }
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }

    if (records.empty()) throw std::runtime_error("FASTA: no records");
    for (const SequenceRecord& r : records)
        if (r.residues.empty())
            throw std::runtime_error("FASTA: record '" + r.id +
                                     "' is empty after gap removal");
    return records;
}

std::vector<SequenceRecord> parse_fasta(const std::filesystem::path& path) {
    return parse_fasta_text(read_file(path));
}

AlphabetPtr resolve_alphabet(std::string_view spec,
                             const std::vector<SequenceRecord>& records) {
    AlphabetPtr alphabet;
    if (spec == "protein") {
        alphabet = std::make_shared<const Alphabet>(Alphabet::protein());
    } else if (spec == "dna") {
        alphabet = std::make_shared<const Alphabet>(Alphabet::dna());
    } else if (spec == "infer") {
        std::set<char> observed;
        for (const SequenceRecord& r : records)
            for (char c : r.residues) observed.insert(c);
        return make_alphabet(std::string(observed.begin(), observed.end()));
    } else {
        alphabet = make_alphabet(spec);
    }
    // A fixed alphabet rejects records it does not cover; silently widening
    // it would change every context weight.
    for (const SequenceRecord& r : records) {
        for (char c : r.residues) {
            if (!alphabet->contains(c)) {
                throw std::runtime_error("record '" + r.id + "' holds symbol '" +
                                         std::string(1, c) +
                                         "' outside the chosen alphabet");
            }
        }
    }
    return alphabet;
}

std::string format_phylip(const DistanceMatrix& matrix) {
    std::unordered_set<std::string> truncated;
    std::string out = std::to_string(matrix.size()) + "\n";
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        std::string name = matrix.labels()[i].substr(0, kPhylipNameWidth);
        if (!truncated.insert(name).second)
            throw std::runtime_error("PHYLIP: taxon names collide at 10 characters: '" +
                                     name + "'");
        name.resize(kPhylipNameWidth, ' ');
        out += name;
        for (std::size_t j = 0; j < matrix.size(); ++j) {
            out.push_back(' ');
            out += format6(matrix.at(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

DistanceMatrix parse_phylip(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }

    std::size_t cursor = 0;
    auto next_content_line = [&]() -> std::string {
        while (cursor < lines.size() && trim(lines[cursor]).empty()) ++cursor;
        if (cursor >= lines.size())
            throw std::runtime_error("PHYLIP: unexpected end of file at line " +
                                     std::to_string(cursor + 1));
        return lines[cursor++];
    };

    std::size_t n = 0;
    {
        std::istringstream head{next_content_line()};
        long long count = 0;
        if (!(head >> count) || count < 1)
            throw std::runtime_error("PHYLIP line 1: expected positive taxon count");
        n = static_cast<std::size_t>(count);
    }

    std::vector<std::string> labels(n);
    std::vector<std::vector<double>> values(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        std::string row_line = next_content_line();
        std::size_t row_start_line = cursor;  // 1-based already consumed
        std::string name(trim(std::string_view(row_line).substr(
            0, std::min(kPhylipNameWidth, row_line.size()))));
        if (name.empty())
            throw std::runtime_error("PHYLIP line " + std::to_string(row_start_line) +
                                     ": empty taxon name");
        labels[i] = name;

        std::string buffer = row_line.size() > kPhylipNameWidth
                                 ? row_line.substr(kPhylipNameWidth)
                                 : std::string();
        std::size_t j = 0;
        while (j < n) {
            std::istringstream vals(buffer);
            std::string tok;
            while (j < n && vals >> tok) {
                try {
                    std::size_t used = 0;
                    values[i][j] = std::stod(tok, &used);
                    if (used != tok.size()) throw std::invalid_argument(tok);
                } catch (const std::exception&) {
                    throw std::runtime_error("PHYLIP row for '" + labels[i] +
                                             "': bad value '" + tok + "' at column " +
                                             std::to_string(j + 1));
                }
                ++j;
            }
            if (j < n) buffer = next_content_line();  // values wrapped to the next line
        }
    }
    for (std::size_t i = cursor; i < lines.size(); ++i)
        if (!trim(lines[i]).empty())
            throw std::runtime_error("PHYLIP: trailing content at line " +
                                     std::to_string(i + 1));

    DistanceMatrix matrix(labels);  // throws on duplicate names
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(values[i][i]) > kSymmetryTolerance)
            throw std::runtime_error("PHYLIP: nonzero diagonal for '" + labels[i] + "'");
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(values[i][j] - values[j][i]) > kSymmetryTolerance)
                throw std::runtime_error("PHYLIP: asymmetry beyond tolerance between '" +
                                         labels[i] + "' and '" + labels[j] + "'");
            matrix.set(i, j, 0.5 * (values[i][j] + values[j][i]));
        }
    }
    return matrix;
}

void write_phylip_matrix(const std::filesystem::path& path, const DistanceMatrix& matrix) {
    write_file_atomic(path, format_phylip(matrix));
}

DistanceMatrix read_phylip_matrix(const std::filesystem::path& path) {
    return parse_phylip(read_file(path));
}

PairedDistances compare_matrices(const DistanceMatrix& first,
                                 const DistanceMatrix& second) {
    std::set<std::string> a(first.labels().begin(), first.labels().end());
    std::set<std::string> b(second.labels().begin(), second.labels().end());
    if (a != b) {
        std::string diff;
        for (const std::string& l : a)
            if (!b.count(l)) diff += " -" + l;
        for (const std::string& l : b)
            if (!a.count(l)) diff += " +" + l;
        throw std::runtime_error("compare_matrices: taxon sets differ:" + diff);
    }

    auto index_of = [](const DistanceMatrix& m, const std::string& label) {
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.labels()[i] == label) return i;
        throw std::logic_error("label vanished: " + label);
    };

    std::vector<std::string> sorted(a.begin(), a.end());
    PairedDistances out;
    out.rows.reserve(sorted.size() * (sorted.size() - 1) / 2);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            PairedDistances::Row row;
            row.taxon_i = sorted[i];
            row.taxon_j = sorted[j];
            row.first = first.at(index_of(first, sorted[i]), index_of(first, sorted[j]));
            row.second =
                second.at(index_of(second, sorted[i]), index_of(second, sorted[j]));
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string paired_csv(const PairedDistances& paired) {
    std::string out = "taxon_i,taxon_j,d1,d2\n";
    for (const PairedDistances::Row& row : paired.rows)
        out += csv_field(row.taxon_i) + "," + csv_field(row.taxon_j) + "," +
               format6(row.first) + "," + format6(row.second) + "\n";
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string sanitize_filename(std::string_view id) {
    std::string out;
    out.reserve(id.size());
    for (char c : id) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    if (out.empty() || out == "." || out == "..") out = "_";
    return out;
}

}  // namespace ctphy
