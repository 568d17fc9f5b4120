#include "korpusmap/textio.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "korpusmap/error.hpp"

namespace korpusmap {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move " + tmp.string() + " to " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

namespace {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

struct TripletFile {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Triplet> entries;
};

TripletFile parse_triplets(std::string_view text) {
    std::istringstream in{std::string(text)};
    in.imbue(std::locale::classic());
    TripletFile file;
    std::size_t nnz = 0;
    std::string line;
    if (!std::getline(in, line)) throw FormatError("triplets: missing header");
    {
        std::istringstream header(line);
        if (!(header >> file.rows >> file.cols >> nnz)) throw FormatError("triplets: malformed header '" + line + "'");
    }
    file.entries.reserve(nnz);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        Triplet t{};
        std::string value;
        if (!(row >> t.row >> t.col >> value)) throw FormatError("triplets: malformed line " + std::to_string(line_no));
        try {
            std::size_t used = 0;
            t.value = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw FormatError("triplets: bad value on line " + std::to_string(line_no));
        }
        if (t.row >= file.rows || t.col >= file.cols)
            throw FormatError("triplets: index out of range on line " + std::to_string(line_no));
        if (!std::isfinite(t.value)) throw FormatError("triplets: non-finite value on line " + std::to_string(line_no));
        file.entries.push_back(t);
    }
    if (file.entries.size() != nnz)
        throw FormatError("triplets: header declares " + std::to_string(nnz) + " entries, found " +
                          std::to_string(file.entries.size()));
    std::sort(file.entries.begin(), file.entries.end(),
              [](const Triplet& a, const Triplet& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    for (std::size_t e = 1; e < file.entries.size(); ++e)
        if (file.entries[e].row == file.entries[e - 1].row && file.entries[e].col == file.entries[e - 1].col)
            throw FormatError("triplets: duplicate entry (" + std::to_string(file.entries[e].row) + ", " +
                              std::to_string(file.entries[e].col) + ")");
    return file;
}

void append_line(std::string& out, std::size_t r, std::size_t c, double v) {
    out += std::to_string(r);
    out += ' ';
    out += std::to_string(c);
    out += ' ';
    out += format_double(v, 17);
    out += '\n';
}

}  // namespace

std::string format_triplets(const DocTermMatrix& matrix) {
    std::string out = std::to_string(matrix.rows()) + ' ' + std::to_string(matrix.cols()) + ' ' +
                      std::to_string(matrix.nnz()) + '\n';
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const auto cols = matrix.row_columns(r);
        const auto weights = matrix.row_weights(r);
        for (std::size_t e = 0; e < cols.size(); ++e) append_line(out, r, cols[e], weights[e]);
    }
    return out;
}

std::string format_triplets(const DenseMatrix& matrix) {
    std::string out = std::to_string(matrix.rows()) + ' ' + std::to_string(matrix.cols()) + ' ' +
                      std::to_string(matrix.rows() * matrix.cols()) + '\n';
    for (std::size_t r = 0; r < matrix.rows(); ++r)
        for (std::size_t c = 0; c < matrix.cols(); ++c) append_line(out, r, c, matrix(r, c));
    return out;
}

DocTermMatrix parse_sparse_triplets(std::string_view text) {
    const TripletFile file = parse_triplets(text);
    std::vector<std::size_t> row_ptr(file.rows + 1, 0);
    std::vector<std::uint32_t> cols;
    std::vector<double> values;
    for (const Triplet& t : file.entries) {
        if (t.value == 0.0) continue;
        ++row_ptr[t.row + 1];
        cols.push_back(static_cast<std::uint32_t>(t.col));
        values.push_back(t.value);
    }
    for (std::size_t r = 0; r < file.rows; ++r) row_ptr[r + 1] += row_ptr[r];
    return DocTermMatrix(file.rows, file.cols, std::move(row_ptr), std::move(cols), std::move(values));
}

DenseMatrix parse_dense_triplets(std::string_view text) {
    const TripletFile file = parse_triplets(text);
    if (file.entries.size() != file.rows * file.cols)
        throw FormatError("dense triplet file has " + std::to_string(file.entries.size()) + " entries, expected " +
                          std::to_string(file.rows * file.cols));
    DenseMatrix out(file.rows, file.cols);
    for (const Triplet& t : file.entries) out(t.row, t.col) = t.value;
    return out;
}

}  // namespace korpusmap
