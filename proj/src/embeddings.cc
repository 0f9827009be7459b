#include "smidge/embeddings.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "smidge/error.h"

namespace smidge {

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) {
        throw UsageError("cosine: dimension mismatch (" +
                         std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()) + ")");
    }
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return u.dot(v) / (nu * nv);
}

namespace {

void validate_finite(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) {
        throw DataError("embedding matrix contains non-finite values");
    }
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(const Vocabulary& vocab,
                                 Eigen::MatrixXd vectors)
    : vectors_(std::move(vectors)) {
    if (static_cast<uint32_t>(vectors_.rows()) != vocab.size()) {
        throw UsageError("embedding rows (" + std::to_string(vectors_.rows()) +
                         ") do not match vocabulary size (" +
                         std::to_string(vocab.size()) + ")");
    }
    validate_finite(vectors_);
    words_.reserve(vocab.size());
    for (uint32_t id = 0; id < vocab.size(); ++id) {
        words_.push_back(vocab.word(id));
        index_.emplace(words_.back(), id);
    }
}

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> words,
                                 Eigen::MatrixXd vectors)
    : words_(std::move(words)), vectors_(std::move(vectors)) {
    if (static_cast<size_t>(vectors_.rows()) != words_.size()) {
        throw UsageError("embedding rows do not match word list size");
    }
    validate_finite(vectors_);
    index_.reserve(words_.size());
    for (uint32_t id = 0; id < words_.size(); ++id) {
        if (!index_.emplace(words_[id], id).second) {
            throw DataError("duplicate word in embedding matrix: '" +
                            words_[id] + "'");
        }
    }
}

uint32_t EmbeddingMatrix::lookup(const std::string& word) const {
    const auto it = index_.find(word);
    return it == index_.end() ? kNotFound : it->second;
}

double EmbeddingMatrix::similarity(const std::string& a,
                                   const std::string& b) const {
    const uint32_t ia = lookup(a);
    const uint32_t ib = lookup(b);
    if (ia == kNotFound || ib == kNotFound) return 0.0;
    return cosine(vectors_.row(ia), vectors_.row(ib));
}

std::vector<std::pair<std::string, double>> EmbeddingMatrix::nearest_neighbors(
    const std::string& word, uint32_t n) const {
    const uint32_t query = lookup(word);
    if (query == kNotFound) {
        throw DataError("word not in vocabulary: '" + word + "'");
    }
    std::vector<std::pair<double, uint32_t>> scored;
    scored.reserve(size() > 0 ? size() - 1 : 0);
    const Eigen::VectorXd q = vectors_.row(query);
    for (uint32_t id = 0; id < size(); ++id) {
        if (id == query) continue;
        scored.emplace_back(cosine(q, vectors_.row(id)), id);
    }
    const size_t want = std::min<size_t>(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + want, scored.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                      });
    std::vector<std::pair<std::string, double>> out;
    out.reserve(want);
    for (size_t i = 0; i < want; ++i) {
        out.emplace_back(words_[scored[i].second], scored[i].first);
    }
    return out;
}

void EmbeddingMatrix::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write embedding file: " + path);
    out << size() << ' ' << dim() << '\n';
    char buf[40];
    for (uint32_t id = 0; id < size(); ++id) {
        out << words_[id];
        for (uint32_t j = 0; j < dim(); ++j) {
            std::snprintf(buf, sizeof(buf), " %.9g", vectors_(id, j));
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write error on embedding file: " + path);
}

EmbeddingMatrix EmbeddingMatrix::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embedding file: " + path);
    const auto fail = [&path](uint64_t line_no, const std::string& what) {
        throw DataError("embedding file " + path + " line " +
                        std::to_string(line_no) + ": " + what);
    };
    std::string line;
    if (!std::getline(in, line)) fail(1, "missing header");
    uint64_t count = 0, dim = 0;
    {
        const char* p = line.c_str();
        char* end = nullptr;
        count = std::strtoull(p, &end, 10);
        if (end == p || *end != ' ') fail(1, "malformed header '" + line + "'");
        p = end + 1;
        dim = std::strtoull(p, &end, 10);
        if (end == p || *end != '\0') {
            fail(1, "malformed header '" + line + "'");
        }
        if (dim == 0) fail(1, "dimension must be >= 1");
    }

    std::vector<std::string> words;
    words.reserve(count);
    Eigen::MatrixXd vectors(count, dim);
    std::unordered_map<std::string, uint32_t> seen;
    uint64_t line_no = 1;
    uint64_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) fail(line_no, "empty line");
        if (row >= count) {
            fail(line_no, "more rows than the header count " +
                              std::to_string(count));
        }
        const size_t sp = line.find(' ');
        if (sp == std::string::npos || sp == 0) {
            fail(line_no, "expected 'word v1 ... vk'");
        }
        std::string word = line.substr(0, sp);
        if (!seen.emplace(word, row).second) {
            fail(line_no, "duplicate word '" + word + "'");
        }
        const char* p = line.c_str() + sp;
        for (uint64_t j = 0; j < dim; ++j) {
            if (*p != ' ') {
                fail(line_no, "expected " + std::to_string(dim) +
                                  " vector components");
            }
            ++p;
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p) fail(line_no, "malformed number");
            if (!std::isfinite(v)) fail(line_no, "non-finite component");
            vectors(row, j) = v;
            p = end;
        }
        if (*p != '\0') {
            fail(line_no, "expected " + std::to_string(dim) +
                              " vector components, found more");
        }
        words.push_back(std::move(word));
        ++row;
    }
    if (in.bad()) throw IoError("read error on embedding file: " + path);
    if (row != count) {
        fail(line_no + 1, "header promises " + std::to_string(count) +
                              " words but the file ends after " +
                              std::to_string(row));
    }
    return EmbeddingMatrix(std::move(words), std::move(vectors));
}

}  // namespace smidge
