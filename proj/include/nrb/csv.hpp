#pragma once

// Deterministic CSV output: fixed column order, 17-significant-digit numeric
// formatting (full double round trip), '.' decimal separator, newline-
// terminated rows, RFC-4180 quoting for text cells.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nrb/errors.hpp"

namespace nrb {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_quote(const std::string& s) {
    bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, std::vector<std::string> header)
        : path_(path), n_cols_(header.size()), out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("CsvWriter: cannot open '" + path + "' for writing");
        if (header.empty()) throw InvalidArgument("CsvWriter: empty header");
        write_cells(header);
    }

    class Row {
      public:
        explicit Row(CsvWriter& w) : writer_(w) {}
        Row& value(double v) {
            cells_.push_back(format_double(v));
            return *this;
        }
        Row& value(int v) { return value_integral(static_cast<long long>(v)); }
        Row& value(long v) { return value_integral(static_cast<long long>(v)); }
        Row& value(long long v) { return value_integral(v); }
        Row& value(unsigned int v) { return value_unsigned(v); }
        Row& value(unsigned long v) { return value_unsigned(v); }
        Row& value(unsigned long long v) { return value_unsigned(v); }
        Row& value(bool v) {
            cells_.push_back(v ? "1" : "0");
            return *this;
        }
        Row& value(const std::string& v) {
            cells_.push_back(csv_quote(v));
            return *this;
        }
        Row& value(const char* v) { return value(std::string(v)); }
        void commit() { writer_.write_cells_raw(cells_); }

      private:
        Row& value_integral(long long v) {
            cells_.push_back(std::to_string(v));
            return *this;
        }
        Row& value_unsigned(unsigned long long v) {
            cells_.push_back(std::to_string(v));
            return *this;
        }
        CsvWriter& writer_;
        std::vector<std::string> cells_;
    };

    Row row() { return Row(*this); }

    size_t rows_written() const { return rows_; }
    const std::string& path() const { return path_; }

    void close() {
        if (out_.is_open()) {
            out_.flush();
            if (!out_) throw ConfigError("CsvWriter: write failure on '" + path_ + "'");
            out_.close();
        }
    }

  private:
    friend class Row;

    void write_cells(const std::vector<std::string>& cells) {
        std::vector<std::string> quoted;
        quoted.reserve(cells.size());
        for (const auto& c : cells) quoted.push_back(csv_quote(c));
        write_cells_raw_header(quoted);
    }

    void write_cells_raw_header(const std::vector<std::string>& cells) {
        emit(cells);
    }

    void write_cells_raw(const std::vector<std::string>& cells) {
        if (cells.size() != n_cols_)
            throw InvalidArgument("CsvWriter: row has " + std::to_string(cells.size()) +
                                  " cells, header has " + std::to_string(n_cols_));
        emit(cells);
        ++rows_;
    }

    void emit(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        if (!out_) throw ConfigError("CsvWriter: write failure on '" + path_ + "'");
    }

    std::string path_;
    size_t n_cols_ = 0;
    size_t rows_ = 0;
    std::ofstream out_;
};

// FNV-1a 64-bit: stable content checksums for manifests.
inline uint64_t fnv1a_hash(const void* data, size_t n, uint64_t seed = 0xcbf29ce484222325ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a_hash(const std::string& s) { return fnv1a_hash(s.data(), s.size()); }

inline uint64_t fnv1a_hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("fnv1a_hash_file: cannot open '" + path + "'");
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0) h = fnv1a_hash(buf, size_t(got), h);
    }
    return h;
}

} // namespace nrb
