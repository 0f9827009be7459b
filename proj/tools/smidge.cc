// smidge: PPMI + truncated SVD word embeddings with Dirichlet-smoothed
// association weighting, plus word-similarity evaluation tooling.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "smidge/config.h"
#include "smidge/cooccurrence.h"
#include "smidge/corpus.h"
#include "smidge/embeddings.h"
#include "smidge/error.h"
#include "smidge/evaluation.h"
#include "smidge/factorization.h"
#include "smidge/weighting.h"

namespace {

using namespace smidge;

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitData = 3;

struct GridSpec {
    size_t count = 43;
    double lo = 1e-6;
    double hi = 1.0;
};

GridSpec parse_grid(const std::string& spec) {
    GridSpec grid;
    const size_t c1 = spec.find(':');
    const size_t c2 = c1 == std::string::npos ? std::string::npos
                                              : spec.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
        throw ConfigError("--grid expects COUNT:LO:HI, got '" + spec + "'");
    }
    try {
        grid.count = std::stoull(spec.substr(0, c1));
        grid.lo = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        grid.hi = std::stod(spec.substr(c2 + 1));
    } catch (const std::exception&) {
        throw ConfigError("--grid expects COUNT:LO:HI, got '" + spec + "'");
    }
    return grid;
}

std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string format_lambda(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// Output sink: a file when -o is given, stdout otherwise.
class OutputTarget {
   public:
    explicit OutputTarget(const std::string& path) : path_(path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw IoError("cannot write output file: " + path);
        }
    }
    std::ostream& stream() { return path_.empty() ? std::cout : file_; }
    void finish() {
        stream().flush();
        if (!path_.empty() && !file_) {
            throw IoError("write error on output file: " + path_);
        }
    }

   private:
    std::string path_;
    std::ofstream file_;
};

void write_sweep_svg(const std::string& path, const SweepResult& sweep) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write SVG file: " + path);
    const double width = 640, height = 400;
    const double ml = 60, mr = 20, mt = 20, mb = 45;
    double ymin = 1e9, ymax = -1e9;
    for (const auto& row : sweep.rows) {
        ymin = std::min(ymin, row.macro_average);
        ymax = std::max(ymax, row.macro_average);
    }
    if (ymax <= ymin) {
        ymax = ymin + 1e-6;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double xmin = std::log10(sweep.rows.front().lambda);
    const double xmax = std::log10(sweep.rows.back().lambda);
    const auto xpix = [&](double lambda) {
        const double t = xmax > xmin
                             ? (std::log10(lambda) - xmin) / (xmax - xmin)
                             : 0.5;
        return ml + t * (width - ml - mr);
    };
    const auto ypix = [&](double rho) {
        return height - mb - (rho - ymin) / (ymax - ymin) *
                                 (height - mt - mb);
    };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
        << width - mr << "\" y2=\"" << height - mb
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(std::ceil(xmin));
         e <= static_cast<int>(std::floor(xmax)); ++e) {
        const double x = xpix(std::pow(10.0, e));
        out << "<line x1=\"" << x << "\" y1=\"" << height - mb << "\" x2=\""
            << x << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << height - mb + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">1e" << e
            << "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double rho = ymin + (ymax - ymin) * t / 4.0;
        const double y = ypix(rho);
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << y << "\" x2=\"" << ml
            << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
            << "\" font-size=\"12\" text-anchor=\"end\">"
            << format_score(rho) << "</text>\n";
    }
    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 8
        << "\" font-size=\"13\" text-anchor=\"middle\">lambda</text>\n";
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
           "points=\"";
    for (const auto& row : sweep.rows) {
        out << xpix(row.lambda) << ',' << ypix(row.macro_average) << ' ';
    }
    out << "\"/>\n</svg>\n";
    if (!out) throw IoError("write error on SVG file: " + path);
}

// Flag plumbing shared by the training-side subcommands. Values land in a
// PipelineConfig with precedence defaults <- config file <- explicit flags.
struct ConfigFlags {
    std::string config_path;
    uint32_t window = 5;
    uint32_t min_count = 1;
    std::string mode = "ppmi_lambda";
    double lambda = 0.01;
    double alpha = 0.75;
    bool keep_negative = false;
    uint32_t k = 100;
    uint32_t oversampling = 10;
    uint32_t power_iterations = 4;
    uint64_t seed = 42;
    double sigma_power = 0.0;
    bool no_lowercase = false;
    uint32_t threads = 0;
    uint64_t first_n = 0;
    uint64_t last_n = 0;

    void add_common(CLI::App* cmd) {
        cmd->add_option("--config", config_path,
                        "flat key = value config file");
        cmd->add_option("--threads", threads,
                        "worker threads (0 = all cores)");
    }
    void add_corpus(CLI::App* cmd) {
        cmd->add_flag("--no-lowercase", no_lowercase,
                      "keep the corpus case as-is");
        auto* first = cmd->add_option("--first-n", first_n,
                                      "use only the first N tokens");
        auto* last = cmd->add_option("--last-n", last_n,
                                     "use only the last N tokens");
        first->excludes(last);
        last->excludes(first);
    }
    void add_vocab(CLI::App* cmd) {
        cmd->add_option("--min-count", min_count,
                        "minimum word count (default 1)");
    }
    void add_weighting(CLI::App* cmd) {
        cmd->add_option("--mode", mode,
                        "ppmi, ppmi_lambda, ppmi_cds, or ppmi_discount");
        cmd->add_option("--lambda", lambda, "add-lambda pseudo-count");
        cmd->add_option("--alpha", alpha, "context distribution exponent");
        cmd->add_flag("--keep-negative", keep_negative,
                      "keep negative association values (no clipping)");
    }
    void add_svd(CLI::App* cmd) {
        cmd->add_option("--k", k, "embedding dimension (default 100)");
        cmd->add_option("--oversampling", oversampling,
                        "extra random probe columns");
        cmd->add_option("--power-iterations", power_iterations,
                        "subspace iteration count");
        cmd->add_option("--seed", seed, "random probe seed");
        cmd->add_option("--sigma-power", sigma_power,
                        "scale U_k by singular_values^p");
    }

    PipelineConfig resolve(const CLI::App* cmd) const {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        const auto given = [cmd](const std::string& name) {
            return cmd->count(name) > 0;
        };
        if (given("--min-count")) cfg.min_count = min_count;
        if (given("--window")) cfg.window.size = window;
        if (given("--mode")) {
            cfg.weighting.mode = weighting_mode_from_string(mode);
        }
        if (given("--lambda")) cfg.weighting.lambda = lambda;
        if (given("--alpha")) cfg.weighting.alpha = alpha;
        if (given("--keep-negative")) cfg.weighting.clip_negative = false;
        if (given("--k")) cfg.svd.k = k;
        if (given("--oversampling")) cfg.svd.oversampling = oversampling;
        if (given("--power-iterations")) {
            cfg.svd.power_iterations = power_iterations;
        }
        if (given("--seed")) cfg.svd.seed = seed;
        if (given("--sigma-power")) cfg.svd.sigma_power = sigma_power;
        if (given("--no-lowercase")) cfg.lowercase = false;
        if (given("--threads")) {
            cfg.threads = threads;
        } else if (const char* env = std::getenv("SMIDGE_THREADS")) {
            cfg.threads = static_cast<uint32_t>(std::strtoul(env, nullptr, 10));
        }
        if (given("--first-n")) {
            cfg.slice = {SliceMode::first_n, first_n};
        } else if (given("--last-n")) {
            cfg.slice = {SliceMode::last_n, last_n};
        }
        cfg.validate();
        return cfg;
    }
};

void log_stage(const std::string& what) { std::cerr << "[smidge] " << what << "\n"; }

EmbeddingMatrix train_embeddings(const std::string& corpus,
                                 const PipelineConfig& cfg,
                                 const std::string& keep_prefix) {
    log_stage("building vocabulary");
    const Vocabulary vocab =
        build_vocabulary(corpus, cfg.tokenizer(), cfg.slice, cfg.min_count);
    log_stage("vocabulary: " + std::to_string(vocab.size()) + " words");
    if (!keep_prefix.empty()) vocab.save_tsv(keep_prefix + ".vocab.tsv");

    log_stage("counting co-occurrences (window " +
              std::to_string(cfg.window.size) + ")");
    const CoocMatrix cooc = count_cooccurrences(
        corpus, cfg.tokenizer(), cfg.slice, vocab, cfg.window, cfg.threads);
    log_stage("counts: " + std::to_string(cooc.nnz()) + " nonzero pairs, " +
              std::to_string(cooc.total()) + " total");
    if (!keep_prefix.empty()) cooc.save(keep_prefix + ".cooc");

    log_stage(std::string("weighting (") + to_string(cfg.weighting.mode) +
              ")");
    const WeightedMatrix weighted =
        weight_matrix(cooc, cfg.weighting, cfg.threads);
    log_stage("weighted: " + std::to_string(weighted.nnz()) +
              " entries kept");
    if (!keep_prefix.empty()) weighted.save(keep_prefix + ".wght");

    log_stage("factorizing (k " + std::to_string(cfg.svd.k) + ")");
    const SvdResult svd = truncated_svd(weighted, cfg.svd, cfg.threads);
    if (svd.rank_deficient) {
        log_stage("warning: effective rank below k, trailing singular "
                  "values are zero");
    }
    return EmbeddingMatrix(vocab, embeddings_from_svd(svd, cfg.svd));
}

int run(int argc, char** argv) {
    CLI::App app{"count-based word embeddings with smoothed PPMI weighting"};
    app.require_subcommand(1);

    // vocab
    auto* vocab_cmd =
        app.add_subcommand("vocab", "build a vocabulary TSV from a corpus");
    std::string vocab_corpus, vocab_out;
    ConfigFlags vocab_flags;
    vocab_cmd->add_option("corpus", vocab_corpus, "tokenized text file")
        ->required();
    vocab_cmd->add_option("-o,--output", vocab_out, "vocabulary TSV path")
        ->required();
    vocab_flags.add_common(vocab_cmd);
    vocab_flags.add_corpus(vocab_cmd);
    vocab_flags.add_vocab(vocab_cmd);

    // count
    auto* count_cmd = app.add_subcommand(
        "count", "count windowed co-occurrences into a COOC file");
    std::string count_corpus, count_vocab, count_out;
    ConfigFlags count_flags;
    count_cmd->add_option("corpus", count_corpus, "tokenized text file")
        ->required();
    count_cmd->add_option("--vocab", count_vocab, "vocabulary TSV")
        ->required();
    count_cmd->add_option("-o,--output", count_out, "COOC output path")
        ->required();
    count_cmd->add_option("--window", count_flags.window,
                          "window size (default 5)");
    count_flags.add_common(count_cmd);
    count_flags.add_corpus(count_cmd);

    // weight
    auto* weight_cmd = app.add_subcommand(
        "weight", "turn counts into a weighted association matrix");
    std::string weight_in, weight_out;
    ConfigFlags weight_flags;
    weight_cmd->add_option("counts", weight_in, "COOC input path")
        ->required();
    weight_cmd->add_option("-o,--output", weight_out, "WGHT output path")
        ->required();
    weight_flags.add_common(weight_cmd);
    weight_flags.add_weighting(weight_cmd);

    // factorize
    auto* factorize_cmd = app.add_subcommand(
        "factorize", "truncated SVD of a weighted matrix -> embeddings");
    std::string factorize_in, factorize_vocab, factorize_out;
    ConfigFlags factorize_flags;
    factorize_cmd->add_option("weighted", factorize_in, "WGHT input path")
        ->required();
    factorize_cmd->add_option("--vocab", factorize_vocab, "vocabulary TSV")
        ->required();
    factorize_cmd->add_option("-o,--output", factorize_out,
                              "embedding text file")
        ->required();
    factorize_flags.add_common(factorize_cmd);
    factorize_flags.add_svd(factorize_cmd);

    // pipeline
    auto* pipeline_cmd = app.add_subcommand(
        "pipeline", "corpus -> vocab -> count -> weight -> factorize");
    std::string pipeline_corpus, pipeline_out, pipeline_keep;
    ConfigFlags pipeline_flags;
    pipeline_cmd->add_option("corpus", pipeline_corpus, "tokenized text file")
        ->required();
    pipeline_cmd->add_option("-o,--output", pipeline_out,
                             "embedding text file")
        ->required();
    pipeline_cmd->add_option("--keep-intermediate", pipeline_keep,
                             "prefix for stage artifacts");
    pipeline_cmd->add_option("--window", pipeline_flags.window,
                             "window size (default 5)");
    pipeline_flags.add_common(pipeline_cmd);
    pipeline_flags.add_corpus(pipeline_cmd);
    pipeline_flags.add_vocab(pipeline_cmd);
    pipeline_flags.add_weighting(pipeline_cmd);
    pipeline_flags.add_svd(pipeline_cmd);

    // eval
    auto* eval_cmd = app.add_subcommand(
        "eval", "score a model on word-similarity datasets");
    std::string eval_model, eval_out;
    std::vector<std::string> eval_datasets;
    ConfigFlags eval_flags;
    eval_cmd->add_option("model", eval_model, "embedding text file")
        ->required();
    eval_cmd->add_option("datasets", eval_datasets,
                         "word1 word2 score files")
        ->required();
    eval_cmd->add_option("-o,--output", eval_out, "report TSV (default stdout)");
    eval_cmd->add_flag("--no-lowercase", eval_flags.no_lowercase,
                       "keep dataset words as-is");
    eval_flags.add_common(eval_cmd);

    // sweep
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "evaluate a lambda grid end to end");
    std::string sweep_corpus, sweep_out, sweep_svg;
    std::string sweep_grid = "43:1e-6:1";
    std::vector<std::string> sweep_datasets;
    ConfigFlags sweep_flags;
    sweep_cmd->add_option("corpus", sweep_corpus, "tokenized text file")
        ->required();
    sweep_cmd->add_option("datasets", sweep_datasets,
                          "word1 word2 score files")
        ->required();
    sweep_cmd->add_option("--grid", sweep_grid,
                          "COUNT:LO:HI log-spaced lambda grid");
    sweep_cmd->add_option("-o,--output", sweep_out,
                          "sweep TSV (default stdout)");
    sweep_cmd->add_option("--svg", sweep_svg,
                          "also render a macro-average line chart");
    sweep_cmd->add_option("--window", sweep_flags.window,
                          "window size (default 5)");
    sweep_flags.add_common(sweep_cmd);
    sweep_flags.add_corpus(sweep_cmd);
    sweep_flags.add_vocab(sweep_cmd);
    sweep_flags.add_svd(sweep_cmd);

    // neighbors
    auto* neighbors_cmd = app.add_subcommand(
        "neighbors", "nearest neighbors of a word by cosine");
    std::string neighbors_model, neighbors_word;
    uint32_t neighbors_n = 10;
    neighbors_cmd->add_option("model", neighbors_model, "embedding text file")
        ->required();
    neighbors_cmd->add_option("word", neighbors_word, "query word")
        ->required();
    neighbors_cmd->add_option("-n", neighbors_n, "neighbor count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (vocab_cmd->parsed()) {
        const PipelineConfig cfg = vocab_flags.resolve(vocab_cmd);
        const Vocabulary vocab = build_vocabulary(
            vocab_corpus, cfg.tokenizer(), cfg.slice, cfg.min_count);
        vocab.save_tsv(vocab_out);
        log_stage("wrote " + std::to_string(vocab.size()) + " words to " +
                  vocab_out);
    } else if (count_cmd->parsed()) {
        const PipelineConfig cfg = count_flags.resolve(count_cmd);
        const Vocabulary vocab = Vocabulary::load_tsv(count_vocab);
        const CoocMatrix cooc =
            count_cooccurrences(count_corpus, cfg.tokenizer(), cfg.slice,
                                vocab, cfg.window, cfg.threads);
        cooc.save(count_out);
        log_stage("wrote " + std::to_string(cooc.nnz()) + " pairs to " +
                  count_out);
    } else if (weight_cmd->parsed()) {
        const PipelineConfig cfg = weight_flags.resolve(weight_cmd);
        const CoocMatrix cooc = CoocMatrix::load(weight_in);
        const WeightedMatrix weighted =
            weight_matrix(cooc, cfg.weighting, cfg.threads);
        weighted.save(weight_out);
        log_stage("wrote " + std::to_string(weighted.nnz()) + " entries to " +
                  weight_out);
    } else if (factorize_cmd->parsed()) {
        const PipelineConfig cfg = factorize_flags.resolve(factorize_cmd);
        const Vocabulary vocab = Vocabulary::load_tsv(factorize_vocab);
        const WeightedMatrix weighted = WeightedMatrix::load(factorize_in);
        if (weighted.n_rows() != vocab.size()) {
            throw DataError("matrix rows (" +
                            std::to_string(weighted.n_rows()) +
                            ") do not match vocabulary size (" +
                            std::to_string(vocab.size()) + ")");
        }
        const SvdResult svd = truncated_svd(weighted, cfg.svd, cfg.threads);
        const EmbeddingMatrix model(vocab, embeddings_from_svd(svd, cfg.svd));
        model.save(factorize_out);
        log_stage("wrote " + std::to_string(model.size()) + " vectors to " +
                  factorize_out);
    } else if (pipeline_cmd->parsed()) {
        const PipelineConfig cfg = pipeline_flags.resolve(pipeline_cmd);
        const EmbeddingMatrix model =
            train_embeddings(pipeline_corpus, cfg, pipeline_keep);
        model.save(pipeline_out);
        log_stage("wrote " + std::to_string(model.size()) + " vectors to " +
                  pipeline_out);
    } else if (eval_cmd->parsed()) {
        const PipelineConfig cfg = eval_flags.resolve(eval_cmd);
        const EmbeddingMatrix model = EmbeddingMatrix::load(eval_model);
        OutputTarget out(eval_out);
        out.stream() << cfg.serialize_commented("# ");
        out.stream() << "# model = " << eval_model << '\n';
        out.stream() << "dataset\trho\tn_pairs\tn_oov_pairs\n";
        for (const std::string& path : eval_datasets) {
            const SimilarityDataset ds = load_dataset(path, cfg.lowercase);
            const EvalReport report = evaluate(model, ds);
            out.stream() << report.dataset << '\t'
                         << format_score(report.rho) << '\t' << report.n_pairs
                         << '\t' << report.n_oov_pairs << '\n';
        }
        out.finish();
    } else if (sweep_cmd->parsed()) {
        PipelineConfig cfg = sweep_flags.resolve(sweep_cmd);
        cfg.weighting.mode = WeightingMode::ppmi_lambda;
        const GridSpec grid = parse_grid(sweep_grid);
        const std::vector<double> lambdas =
            lambda_grid(grid.count, grid.lo, grid.hi);
        std::vector<SimilarityDataset> datasets;
        for (const std::string& path : sweep_datasets) {
            datasets.push_back(load_dataset(path, cfg.lowercase));
        }
        OutputTarget out(sweep_out);
        out.stream() << cfg.serialize_commented("# ");
        out.stream() << "# lambda";
        for (const auto& ds : datasets) out.stream() << '\t' << ds.name;
        out.stream() << "\tmacro_avg\n";
        const SweepResult sweep = sweep_lambda(
            sweep_corpus, cfg, lambdas, datasets,
            [&out, &datasets](const SweepRow& row) {
                out.stream() << format_lambda(row.lambda);
                for (const double rho : row.per_dataset_rho) {
                    out.stream() << '\t' << format_score(rho);
                }
                out.stream() << '\t' << format_score(row.macro_average)
                             << '\n';
                out.stream().flush();
                log_stage("lambda " + format_lambda(row.lambda) +
                          " -> macro " + format_score(row.macro_average));
                (void)datasets;
            });
        out.stream() << "# best_lambda = " << format_lambda(sweep.best_lambda)
                     << '\n';
        out.finish();
        if (!sweep_svg.empty()) write_sweep_svg(sweep_svg, sweep);
    } else if (neighbors_cmd->parsed()) {
        const EmbeddingMatrix model = EmbeddingMatrix::load(neighbors_model);
        const auto neighbors =
            model.nearest_neighbors(neighbors_word, neighbors_n);
        uint32_t rank = 1;
        for (const auto& [word, score] : neighbors) {
            std::cout << rank++ << '\t' << word << '\t' << format_score(score)
                      << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const smidge::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const smidge::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const smidge::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
