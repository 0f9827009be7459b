#ifndef SMIDGE_BINARY_IO_H_
#define SMIDGE_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "smidge/error.h"

namespace smidge {

// Little-endian framed binary files (COOC and WGHT matrices).

class ByteWriter {
   public:
    explicit ByteWriter(const std::string& path)
        : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot write file: " + path);
    }

    void bytes(const void* data, size_t n) {
        out_.write(static_cast<const char*>(data),
                   static_cast<std::streamsize>(n));
    }
    void u8(uint8_t v) { bytes(&v, 1); }
    void u32(uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xFF;
        bytes(b, 4);
    }
    void u64(uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xFF;
        bytes(b, 8);
    }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

    void finish() {
        out_.flush();
        if (!out_) throw IoError("write error on file: " + path_);
    }

   private:
    std::string path_;
    std::ofstream out_;
};

class ByteReader {
   public:
    explicit ByteReader(const std::string& path)
        : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw IoError("cannot open file: " + path);
    }

    void bytes(void* data, size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in_.gcount()) != n) {
            if (in_.bad()) throw IoError("read error on file: " + path_);
            throw DataError("truncated file: " + path_ + " (wanted " +
                            std::to_string(n) + " bytes at offset " +
                            std::to_string(off_) + ")");
        }
        off_ += n;
    }
    uint8_t u8() {
        uint8_t v;
        bytes(&v, 1);
        return v;
    }
    uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }

    bool at_eof() {
        return in_.peek() == std::char_traits<char>::eof();
    }

    uint64_t offset() const { return off_; }
    const std::string& path() const { return path_; }

   private:
    std::string path_;
    std::ifstream in_;
    uint64_t off_ = 0;
};

}  // namespace smidge

#endif  // SMIDGE_BINARY_IO_H_
