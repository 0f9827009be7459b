#ifndef SMIDGE_EMBEDDINGS_H_
#define SMIDGE_EMBEDDINGS_H_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "smidge/corpus.h"

namespace smidge {

// Cosine similarity; zero-norm vectors score 0 instead of NaN.
double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Dense word vectors bound to a word list. Row i is word i's vector.
// Immutable and safe to share across threads.
class EmbeddingMatrix {
   public:
    EmbeddingMatrix(const Vocabulary& vocab, Eigen::MatrixXd vectors);
    EmbeddingMatrix(std::vector<std::string> words, Eigen::MatrixXd vectors);

    uint32_t size() const { return static_cast<uint32_t>(words_.size()); }
    uint32_t dim() const { return static_cast<uint32_t>(vectors_.cols()); }
    const std::string& word(uint32_t id) const { return words_[id]; }
    const Eigen::MatrixXd& vectors() const { return vectors_; }

    static constexpr uint32_t kNotFound = UINT32_MAX;
    uint32_t lookup(const std::string& word) const;

    // Cosine of the two words' vectors; out-of-vocabulary words make the
    // pair score exactly 0 (a defined value, not an error).
    double similarity(const std::string& a, const std::string& b) const;

    // Top-n other words by cosine, ties broken by word id. The query must be
    // in vocabulary.
    std::vector<std::pair<std::string, double>> nearest_neighbors(
        const std::string& word, uint32_t n) const;

    // word2vec text interchange: "<count> <dim>\n" then one
    // "word v1 ... vk\n" per word, 9 significant digits.
    void save(const std::string& path) const;
    static EmbeddingMatrix load(const std::string& path);

   private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, uint32_t> index_;
    Eigen::MatrixXd vectors_;
};

}  // namespace smidge

#endif  // SMIDGE_EMBEDDINGS_H_
