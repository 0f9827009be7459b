#include "smidge/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "smidge/error.h"
#include "smidge/factorization.h"

namespace smidge {

SimilarityDataset load_dataset(const std::string& path, bool lowercase) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset file: " + path);
    SimilarityDataset ds;
    ds.name = std::filesystem::path(path).stem().string();
    const auto fail = [&path](uint64_t line_no, const std::string& what) {
        throw DataError("dataset file " + path + " line " +
                        std::to_string(line_no) + ": " + what);
    };
    const auto lower = [lowercase](std::string w) {
        if (lowercase) {
            for (char& c : w) {
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            }
        }
        return w;
    };
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            size_t j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
            if (j > i) fields.push_back(line.substr(i, j - i));
            i = j;
        }
        if (fields.empty()) continue;
        if (fields[0][0] == '#') continue;
        if (fields.size() != 3) {
            fail(line_no, "expected 'word1 word2 score', got " +
                              std::to_string(fields.size()) + " fields");
        }
        char* end = nullptr;
        const double score = std::strtod(fields[2].c_str(), &end);
        if (end == fields[2].c_str() || *end != '\0' ||
            !std::isfinite(score)) {
            fail(line_no, "malformed score '" + fields[2] + "'");
        }
        ds.pairs.push_back(
            {lower(std::move(fields[0])), lower(std::move(fields[1])), score});
    }
    if (in.bad()) throw IoError("read error on dataset file: " + path);
    if (ds.pairs.empty()) {
        throw DataError("dataset file " + path + " contains no pairs");
    }
    return ds;
}

std::vector<double> fractional_ranks(std::span<const double> xs) {
    const size_t n = xs.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&xs](size_t a, size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i + 1;
        while (j < n && xs[order[j]] == xs[order[i]]) ++j;
        // 1-based ranks i+1 .. j averaged over the tie span
        const double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (size_t t = i; t < j; ++t) ranks[order[t]] = avg;
        i = j;
    }
    return ranks;
}

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw UsageError("spearman_rho: length mismatch");
    }
    if (xs.size() < 2) {
        throw DataError("spearman_rho: need at least 2 observations");
    }
    const std::vector<double> rx = fractional_ranks(xs);
    const std::vector<double> ry = fractional_ranks(ys);
    const size_t n = rx.size();
    const double mean = 0.5 * static_cast<double>(n + 1);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) {
        throw DataError("spearman_rho: zero rank variance");
    }
    return sxy / std::sqrt(sxx * syy);
}

EvalReport evaluate(const EmbeddingMatrix& model,
                    const SimilarityDataset& dataset) {
    if (dataset.pairs.size() < 2) {
        throw DataError("dataset '" + dataset.name +
                        "' has fewer than 2 pairs");
    }
    EvalReport report;
    report.dataset = dataset.name;
    report.n_pairs = dataset.pairs.size();
    std::vector<double> gold;
    std::vector<double> scores;
    gold.reserve(dataset.pairs.size());
    scores.reserve(dataset.pairs.size());
    for (const auto& pair : dataset.pairs) {
        if (model.lookup(pair.word1) == EmbeddingMatrix::kNotFound ||
            model.lookup(pair.word2) == EmbeddingMatrix::kNotFound) {
            report.n_oov_pairs++;
        }
        gold.push_back(pair.gold);
        scores.push_back(model.similarity(pair.word1, pair.word2));
    }
    try {
        report.rho = spearman_rho(gold, scores);
    } catch (const DataError& e) {
        throw DataError("dataset '" + dataset.name + "': " + e.what());
    }
    return report;
}

std::vector<double> lambda_grid(size_t count, double lo, double hi) {
    if (count < 1) throw ConfigError("lambda grid needs at least 1 value");
    if (!(lo > 0) || !(hi > 0)) {
        throw ConfigError("lambda grid bounds must be > 0");
    }
    if (lo > hi) throw ConfigError("lambda grid bounds must satisfy lo <= hi");
    if (count == 1) {
        if (lo != hi) {
            throw ConfigError("a single-point lambda grid needs lo == hi");
        }
        return {lo};
    }
    std::vector<double> grid(count);
    const double step = (std::log(hi) - std::log(lo)) /
                        static_cast<double>(count - 1);
    for (size_t i = 0; i < count; ++i) {
        grid[i] = std::exp(std::log(lo) + step * static_cast<double>(i));
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

SweepResult sweep_lambda(const std::string& corpus_path,
                         const PipelineConfig& config,
                         std::span<const double> lambdas,
                         const std::vector<SimilarityDataset>& datasets,
                         const std::function<void(const SweepRow&)>& on_row) {
    config.validate();
    if (lambdas.empty()) throw ConfigError("sweep needs at least 1 lambda");
    for (size_t i = 0; i + 1 < lambdas.size(); ++i) {
        if (!(lambdas[i] < lambdas[i + 1])) {
            throw ConfigError("sweep lambdas must be strictly increasing");
        }
    }
    if (datasets.empty()) throw ConfigError("sweep needs at least 1 dataset");

    const Vocabulary vocab = build_vocabulary(
        corpus_path, config.tokenizer(), config.slice, config.min_count);
    // The counts do not depend on lambda; build them once.
    const CoocMatrix cooc =
        count_cooccurrences(corpus_path, config.tokenizer(), config.slice,
                            vocab, config.window, config.threads);

    SweepResult result;
    result.rows.reserve(lambdas.size());
    for (const double lambda : lambdas) {
        WeightingConfig wcfg = config.weighting;
        wcfg.mode = WeightingMode::ppmi_lambda;
        wcfg.lambda = lambda;
        const WeightedMatrix weighted =
            weight_matrix(cooc, wcfg, config.threads);
        const SvdResult svd =
            truncated_svd(weighted, config.svd, config.threads);
        const EmbeddingMatrix model(vocab,
                                    embeddings_from_svd(svd, config.svd));
        SweepRow row;
        row.lambda = lambda;
        double sum = 0.0;
        for (const SimilarityDataset& ds : datasets) {
            const EvalReport report = evaluate(model, ds);
            row.per_dataset_rho.push_back(report.rho);
            sum += report.rho;
        }
        row.macro_average = sum / static_cast<double>(datasets.size());
        if (on_row) on_row(row);
        result.rows.push_back(std::move(row));
    }

    size_t best = 0;
    for (size_t i = 1; i < result.rows.size(); ++i) {
        if (result.rows[i].macro_average > result.rows[best].macro_average) {
            best = i;
        }
    }
    result.best_lambda = result.rows[best].lambda;
    return result;
}

}  // namespace smidge
