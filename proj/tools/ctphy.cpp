// Command-line front end: train, dist, nj, compare, and the full pipeline.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctphy/entropy.hpp"
#include "ctphy/estimator.hpp"
#include "ctphy/io.hpp"
#include "ctphy/phylo.hpp"
#include "ctphy/tree.hpp"

namespace fs = std::filesystem;
using namespace ctphy;

namespace {

std::string format6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

struct TrainedBatch {
    AlphabetPtr alphabet;
    std::vector<std::string> ids;
    std::vector<EstimatedModel> models;
};

TrainedBatch train_batch(const fs::path& fasta, const std::string& alphabet_spec,
                         const EstimatorConfig& config) {
    const auto records = parse_fasta(fasta);
    AlphabetPtr alphabet = resolve_alphabet(alphabet_spec, records);

    std::vector<std::string> sequences;
    sequences.reserve(records.size());
    TrainedBatch batch;
    batch.alphabet = alphabet;
    for (const auto& record : records) {
        batch.ids.push_back(record.id);
        sequences.push_back(record.residues);
    }
    batch.models = estimate_all(sequences, alphabet, config);
    return batch;
}

// One .tree file per record plus run.meta; optionally full .model files.
// Returns the id -> filename-stem mapping used for the files.
std::map<std::string, std::string> write_batch(const TrainedBatch& batch,
                                               const fs::path& out_dir,
                                               const EstimatorConfig& config,
                                               bool write_models) {
    fs::create_directories(out_dir);

    std::map<std::string, std::string> stems;  // id -> stem, deterministic order
    std::map<std::string, std::string> taken;  // stem -> id, collision check
    for (const auto& id : batch.ids) {
        std::string stem = sanitize_filename(id);
        auto [it, fresh] = taken.emplace(stem, id);
        if (!fresh) {
            throw std::runtime_error("record ids '" + it->second + "' and '" + id +
                                     "' collide on output filename '" + stem + "'");
        }
        stems[id] = stem;
    }

    std::string meta;
    meta += "alphabet=" + batch.alphabet->symbols() + "\n";
    meta += "max_depth=" + std::to_string(config.max_depth) + "\n";
    meta += "min_count=" + std::to_string(config.min_count) + "\n";
    meta += "merge_threshold=" + format6(config.merge_threshold) + "\n";
    meta += "keep_threshold=" + format6(config.keep_threshold) + "\n";
    meta += "pseudocount=" + format6(config.pseudocount) + "\n";
    meta += "records=" + std::to_string(batch.ids.size()) + "\n";

    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
        const std::string& stem = stems.at(batch.ids[i]);
        write_file_atomic(out_dir / (stem + ".tree"), serialize_tree(batch.models[i].tree));
        if (write_models) {
            write_file_atomic(out_dir / (stem + ".model"),
                              serialize_model(batch.models[i], &config));
        }
        meta += batch.ids[i] + " -> " + stem + ".tree\n";
    }
    write_file_atomic(out_dir / "run.meta", meta);
    return stems;
}

std::vector<LabeledTree> load_tree_dir(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".tree") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw std::runtime_error("no .tree files in '" + dir.string() + "'");
    }

    std::vector<LabeledTree> trees;
    trees.reserve(files.size());
    for (const auto& file : files) {
        SparseContextTree tree = parse_tree(read_file(file));
        if (!trees.empty() && !(tree.alphabet() == trees.front().second.alphabet())) {
            throw std::runtime_error("'" + file.string() +
                                     "' uses a different alphabet than '" +
                                     trees.front().first + ".tree'");
        }
        if (!validate_tree(tree).is_consistent) {
            throw std::runtime_error("'" + file.string() + "' holds overlapping contexts");
        }
        trees.emplace_back(file.stem().string(), std::move(tree));
    }
    return trees;
}

void emit_phylogeny(const DistanceMatrix& matrix, const std::optional<std::string>& outgroup,
                    const fs::path& out) {
    PhyloTree tree = neighbor_join(matrix);
    if (outgroup) tree = root_at_outgroup(tree, *outgroup);
    write_file_atomic(out, newick_emit(tree));
}

void add_estimator_flags(CLI::App& cmd, EstimatorConfig& config) {
    cmd.add_option("--max-depth", config.max_depth, "Deepest history position considered")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd.add_option("--min-count", config.min_count,
                   "Pooled occurrences required to extend a branch")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd.add_option("--merge-threshold", config.merge_threshold,
                   "Sibling divergence (bits) below which symbols merge")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--keep-threshold", config.keep_threshold,
                   "Divergence gain (bits x count) a child needs to survive")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--pseudocount", config.pseudocount,
                   "Additive smoothing for predictive distributions")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse context tree estimation, entropy distances, and phylogeny"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "Estimate one context tree per FASTA record");
    fs::path train_fasta;
    fs::path train_out;
    std::string train_alphabet = "infer";
    EstimatorConfig train_config;
    bool train_models = false;
    train->add_option("fasta", train_fasta, "Input FASTA")->required();
    train->add_option("-o,--out", train_out, "Output directory")->required();
    train->add_option("--alphabet", train_alphabet,
                      "infer, protein, dna, or an explicit symbol string")
        ->capture_default_str();
    add_estimator_flags(*train, train_config);
    train->add_flag("--models", train_models,
                    "Also write .model files with the predictive distributions");
    train->callback([&] {
        write_batch(train_batch(train_fasta, train_alphabet, train_config), train_out,
                    train_config, train_models);
    });

    // dist
    auto* dist = app.add_subcommand("dist", "Distance matrix over a directory of tree files");
    fs::path dist_dir;
    fs::path dist_out;
    double dist_beta = 1.0;
    dist->add_option("trees", dist_dir, "Directory of .tree files")->required();
    dist->add_option("-o,--out", dist_out, "Output PHYLIP matrix")->required();
    dist->add_option("--beta", dist_beta, "Entropy order")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    dist->callback([&] {
        write_phylip_matrix(dist_out,
                            distance_matrix(load_tree_dir(dist_dir), BetaParam(dist_beta)));
    });

    // nj
    auto* nj = app.add_subcommand("nj", "Neighbor-joining tree from a PHYLIP matrix");
    fs::path nj_matrix;
    fs::path nj_out;
    std::string nj_outgroup;
    nj->add_option("matrix", nj_matrix, "PHYLIP distance matrix")->required();
    nj->add_option("-o,--out", nj_out, "Output Newick file")->required();
    nj->add_option("--outgroup", nj_outgroup, "Root at this taxon's pendant edge");
    nj->callback([&] {
        std::optional<std::string> outgroup;
        if (!nj_outgroup.empty()) outgroup = nj_outgroup;
        emit_phylogeny(read_phylip_matrix(nj_matrix), outgroup, nj_out);
    });

    // compare
    auto* compare = app.add_subcommand("compare", "Pair up two distance matrices as CSV");
    fs::path compare_a;
    fs::path compare_b;
    fs::path compare_out;
    compare->add_option("first", compare_a, "First PHYLIP matrix")->required();
    compare->add_option("second", compare_b, "Second PHYLIP matrix")->required();
    compare->add_option("-o,--out", compare_out, "Output CSV")->required();
    compare->callback([&] {
        write_file_atomic(compare_out,
                          paired_csv(compare_matrices(read_phylip_matrix(compare_a),
                                                      read_phylip_matrix(compare_b))));
    });

    // pipeline
    auto* pipeline =
        app.add_subcommand("pipeline", "FASTA to trees, distance matrix, and Newick");
    fs::path pipe_fasta;
    fs::path pipe_out;
    std::string pipe_alphabet = "infer";
    EstimatorConfig pipe_config;
    double pipe_beta = 1.0;
    std::string pipe_outgroup;
    bool pipe_models = false;
    pipeline->add_option("fasta", pipe_fasta, "Input FASTA")->required();
    pipeline->add_option("-o,--out", pipe_out, "Output directory")->required();
    pipeline->add_option("--alphabet", pipe_alphabet,
                         "infer, protein, dna, or an explicit symbol string")
        ->capture_default_str();
    add_estimator_flags(*pipeline, pipe_config);
    pipeline->add_option("--beta", pipe_beta, "Entropy order")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    pipeline->add_option("--outgroup", pipe_outgroup, "Root at this taxon's pendant edge");
    pipeline->add_flag("--models", pipe_models,
                       "Also write .model files with the predictive distributions");
    pipeline->callback([&] {
        TrainedBatch batch = train_batch(pipe_fasta, pipe_alphabet, pipe_config);
        write_batch(batch, pipe_out / "trees", pipe_config, pipe_models);

        std::vector<LabeledTree> labeled;
        labeled.reserve(batch.ids.size());
        for (std::size_t i = 0; i < batch.ids.size(); ++i) {
            labeled.emplace_back(batch.ids[i], batch.models[i].tree);
        }
        DistanceMatrix matrix = distance_matrix(labeled, BetaParam(pipe_beta));
        write_phylip_matrix(pipe_out / "distances.phy", matrix);

        std::optional<std::string> outgroup;
        if (!pipe_outgroup.empty()) outgroup = pipe_outgroup;
        emit_phylogeny(matrix, outgroup, pipe_out / "tree.nwk");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
