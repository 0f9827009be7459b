#ifndef SMIDGE_EVALUATION_H_
#define SMIDGE_EVALUATION_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "smidge/config.h"
#include "smidge/embeddings.h"

namespace smidge {

struct SimilarityDataset {
    struct Pair {
        std::string word1;
        std::string word2;
        double gold;
    };
    std::string name;
    std::vector<Pair> pairs;
};

struct EvalReport {
    std::string dataset;
    double rho = 0.0;
    uint64_t n_pairs = 0;
    uint64_t n_oov_pairs = 0;  // pairs with at least one untrained word
};

struct SweepRow {
    double lambda = 0.0;
    std::vector<double> per_dataset_rho;
    double macro_average = 0.0;  // unweighted mean over datasets
};

struct SweepResult {
    std::vector<SweepRow> rows;  // one per lambda, ascending
    double best_lambda = 0.0;    // argmax of the macro average
};

// Parses `word1 word2 score` lines (any whitespace); `#` comments and blank
// lines are skipped. Words are lowercased by default to match the corpus
// normalization.
SimilarityDataset load_dataset(const std::string& path,
                               bool lowercase = true);

// Fractional (average) ranks, 1-based; ties share the mean of their span.
std::vector<double> fractional_ranks(std::span<const double> xs);

// Spearman's rank correlation: Pearson correlation of the two rank
// sequences with average ranks for ties.
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

// Scores every pair through EmbeddingMatrix::similarity (OOV pairs score 0
// and stay in the correlation) and correlates against the gold scores.
EvalReport evaluate(const EmbeddingMatrix& model,
                    const SimilarityDataset& dataset);

// `count` logarithmically spaced values over [lo, hi], endpoints included.
std::vector<double> lambda_grid(size_t count, double lo, double hi);

// Runs count -> weight(ppmi_lambda) -> factorize -> evaluate end to end for
// each lambda. The co-occurrence matrix is built once; only weighting, SVD,
// and evaluation depend on lambda. `on_row` (optional) observes each
// finished row in lambda order.
SweepResult sweep_lambda(const std::string& corpus_path,
                         const PipelineConfig& config,
                         std::span<const double> lambdas,
                         const std::vector<SimilarityDataset>& datasets,
                         const std::function<void(const SweepRow&)>& on_row =
                             nullptr);

}  // namespace smidge

#endif  // SMIDGE_EVALUATION_H_
