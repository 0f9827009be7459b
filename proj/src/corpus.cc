#include "smidge/corpus.h"

#include <algorithm>
#include <cstring>

#include "smidge/error.h"

namespace smidge {

namespace {

constexpr size_t kChunkSize = 1 << 20;

// One decoded UTF-8 code point. `length` is 0 when the buffer ends inside
// the sequence, -1 when the byte sequence is not valid UTF-8.
struct Decoded {
    uint32_t cp = 0;
    int length = 0;
};

bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

Decoded decode_point(const char* data, size_t size, size_t i) {
    const unsigned char b0 = static_cast<unsigned char>(data[i]);
    if (b0 < 0x80) return {b0, 1};
    if (b0 < 0xC2) return {0, -1};  // stray continuation or overlong lead
    int len;
    uint32_t cp;
    unsigned char lo = 0x80, hi = 0xBF;
    if (b0 < 0xE0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if (b0 < 0xF0) {
        len = 3;
        cp = b0 & 0x0F;
        if (b0 == 0xE0) lo = 0xA0;        // reject overlong
        if (b0 == 0xED) hi = 0x9F;        // reject surrogates
    } else if (b0 < 0xF5) {
        len = 4;
        cp = b0 & 0x07;
        if (b0 == 0xF0) lo = 0x90;        // reject overlong
        if (b0 == 0xF4) hi = 0x8F;        // reject > U+10FFFF
    } else {
        return {0, -1};
    }
    if (i + static_cast<size_t>(len) > size) return {0, 0};
    for (int k = 1; k < len; ++k) {
        const unsigned char b = static_cast<unsigned char>(data[i + k]);
        const unsigned char floor = (k == 1) ? lo : 0x80;
        const unsigned char ceil = (k == 1) ? hi : 0xBF;
        if (b < floor || b > ceil) return {0, -1};
        cp = (cp << 6) | (b & 0x3F);
    }
    return {cp, len};
}

bool is_space_cp(uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

[[noreturn]] void throw_decode_error(const std::string& path, uint64_t off) {
    throw DataError("invalid UTF-8 at byte " + std::to_string(off) + " in " +
                    path);
}

}  // namespace

TokenReader::TokenReader(const std::string& path, TokenizerOptions opts)
    : path_(path), opts_(opts), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open corpus file: " + path);
    buf_.reserve(kChunkSize + 8);
}

void TokenReader::refill() {
    buf_.erase(0, pos_);
    base_off_ += pos_;
    pos_ = 0;
    const size_t old = buf_.size();
    buf_.resize(old + kChunkSize);
    in_.read(buf_.data() + old, static_cast<std::streamsize>(kChunkSize));
    const size_t got = static_cast<size_t>(in_.gcount());
    buf_.resize(old + got);
    if (got < kChunkSize) {
        if (in_.bad()) throw IoError("read error on corpus file: " + path_);
        eof_ = true;
    }
}

bool TokenReader::next(std::string& token) {
    token.clear();
    for (;;) {
        if (pos_ >= buf_.size()) {
            if (eof_) break;
            refill();
            continue;
        }
        const Decoded d = decode_point(buf_.data(), buf_.size(), pos_);
        if (d.length == 0) {
            if (eof_) throw_decode_error(path_, base_off_ + pos_);
            refill();
            continue;
        }
        if (d.length < 0) throw_decode_error(path_, base_off_ + pos_);
        if (is_space_cp(d.cp)) {
            pos_ += static_cast<size_t>(d.length);
            if (!token.empty()) return true;
            continue;
        }
        for (int k = 0; k < d.length; ++k) {
            const char c = buf_[pos_ + static_cast<size_t>(k)];
            token.push_back(opts_.lowercase ? ascii_lower(c) : c);
        }
        pos_ += static_cast<size_t>(d.length);
    }
    return !token.empty();
}

uint64_t count_tokens(const std::string& path, TokenizerOptions opts) {
    TokenReader reader(path, opts);
    uint64_t n = 0;
    std::string tok;
    while (reader.next(tok)) ++n;
    return n;
}

SlicedTokenReader::SlicedTokenReader(const std::string& path,
                                     TokenizerOptions opts,
                                     const CorpusSlice& slice)
    : reader_(path, opts), remaining_(0), unbounded_(false) {
    switch (slice.mode) {
        case SliceMode::all:
            unbounded_ = true;
            break;
        case SliceMode::first_n:
            if (slice.n == 0) throw ConfigError("slice n must be > 0");
            remaining_ = slice.n;
            break;
        case SliceMode::last_n: {
            if (slice.n == 0) throw ConfigError("slice n must be > 0");
            const uint64_t total = count_tokens(path, opts);
            remaining_ = std::min(slice.n, total);
            skip_ = total - remaining_;
            break;
        }
    }
}

bool SlicedTokenReader::next(std::string& token) {
    while (skip_ > 0) {
        if (!reader_.next(token)) return false;
        --skip_;
    }
    if (!unbounded_) {
        if (remaining_ == 0) return false;
        --remaining_;
    }
    return reader_.next(token);
}

uint32_t Vocabulary::lookup(const std::string& word) const {
    const auto it = index_.find(word);
    return it == index_.end() ? kNotFound : it->second;
}

uint64_t Vocabulary::total_count() const {
    uint64_t sum = 0;
    for (const uint64_t c : counts_) sum += c;
    return sum;
}

uint64_t Vocabulary::fingerprint() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](const void* data, size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (uint32_t id = 0; id < size(); ++id) {
        mix(words_[id].data(), words_[id].size());
        const char sep = '\0';
        mix(&sep, 1);
        mix(&counts_[id], sizeof(uint64_t));
    }
    return h;
}

Vocabulary Vocabulary::from_counts(
    const std::unordered_map<std::string, uint64_t>& raw, uint32_t min_count) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    Vocabulary v;
    v.min_count_ = min_count;
    std::vector<std::pair<std::string, uint64_t>> kept;
    kept.reserve(raw.size());
    for (const auto& [word, count] : raw) {
        if (count >= min_count) kept.emplace_back(word, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    v.words_.reserve(kept.size());
    v.counts_.reserve(kept.size());
    v.index_.reserve(kept.size());
    for (auto& [word, count] : kept) {
        v.index_.emplace(word, static_cast<uint32_t>(v.words_.size()));
        v.words_.push_back(std::move(word));
        v.counts_.push_back(count);
    }
    return v;
}

void Vocabulary::save_tsv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocabulary file: " + path);
    for (uint32_t id = 0; id < size(); ++id) {
        out << words_[id] << '\t' << counts_[id] << '\n';
    }
    if (!out) throw IoError("write error on vocabulary file: " + path);
}

Vocabulary Vocabulary::load_tsv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocabulary file: " + path);
    Vocabulary v;
    v.min_count_ = 1;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            throw DataError("vocabulary file " + path + " line " +
                            std::to_string(line_no) + ": empty line");
        }
        const size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw DataError("vocabulary file " + path + " line " +
                            std::to_string(line_no) +
                            ": expected word<TAB>count");
        }
        std::string word = line.substr(0, tab);
        uint64_t count = 0;
        const char* first = line.data() + tab + 1;
        const char* last = line.data() + line.size();
        if (first == last) {
            throw DataError("vocabulary file " + path + " line " +
                            std::to_string(line_no) + ": missing count");
        }
        for (const char* p = first; p != last; ++p) {
            if (*p < '0' || *p > '9') {
                throw DataError("vocabulary file " + path + " line " +
                                std::to_string(line_no) +
                                ": malformed count '" +
                                std::string(first, last) + "'");
            }
            count = count * 10 + static_cast<uint64_t>(*p - '0');
        }
        if (count == 0) {
            throw DataError("vocabulary file " + path + " line " +
                            std::to_string(line_no) + ": zero count");
        }
        if (v.index_.count(word) > 0) {
            throw DataError("vocabulary file " + path + " line " +
                            std::to_string(line_no) + ": duplicate word '" +
                            word + "'");
        }
        v.index_.emplace(word, static_cast<uint32_t>(v.words_.size()));
        v.words_.push_back(std::move(word));
        v.counts_.push_back(count);
    }
    if (in.bad()) throw IoError("read error on vocabulary file: " + path);
    return v;
}

Vocabulary build_vocabulary(const std::string& path, TokenizerOptions opts,
                            const CorpusSlice& slice, uint32_t min_count) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    SlicedTokenReader reader(path, opts, slice);
    std::unordered_map<std::string, uint64_t> counts;
    std::string tok;
    while (reader.next(tok)) ++counts[tok];
    return Vocabulary::from_counts(counts, min_count);
}

std::vector<uint32_t> ids_from_corpus(const std::string& path,
                                      TokenizerOptions opts,
                                      const CorpusSlice& slice,
                                      const Vocabulary& vocab) {
    SlicedTokenReader reader(path, opts, slice);
    std::vector<uint32_t> ids;
    std::string tok;
    while (reader.next(tok)) {
        const uint32_t id = vocab.lookup(tok);
        ids.push_back(id == Vocabulary::kNotFound ? kOovId : id);
    }
    return ids;
}

std::vector<std::string> tokenize(const std::string& text,
                                  TokenizerOptions opts) {
    std::vector<std::string> tokens;
    std::string cur;
    size_t i = 0;
    while (i < text.size()) {
        const Decoded d = decode_point(text.data(), text.size(), i);
        if (d.length <= 0) throw_decode_error("<memory>", i);
        if (is_space_cp(d.cp)) {
            if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
        } else {
            for (int k = 0; k < d.length; ++k) {
                const char c = text[i + static_cast<size_t>(k)];
                cur.push_back(opts.lowercase ? ascii_lower(c) : c);
            }
        }
        i += static_cast<size_t>(d.length);
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

}  // namespace smidge
