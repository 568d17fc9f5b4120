#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "korpusmap/matrix.hpp"

namespace korpusmap {

/// Writes `contents` to a sibling temp file and renames it over `path`, so
/// readers never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Triplet text format: a `rows cols nnz` header, then one `row col value`
/// line per stored entry with 17 significant digits. Dense matrices store
/// every entry.
std::string format_triplets(const DocTermMatrix& matrix);
std::string format_triplets(const DenseMatrix& matrix);

/// Entries are sorted into row/column order; duplicates are rejected.
/// Zero-valued entries are dropped when parsing into a DocTermMatrix; a
/// dense file must list every entry.
DocTermMatrix parse_sparse_triplets(std::string_view text);
DenseMatrix parse_dense_triplets(std::string_view text);

/// `%.<digits>g` formatting in the C locale.
std::string format_double(double value, int digits);

}  // namespace korpusmap
