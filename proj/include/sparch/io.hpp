#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sparch/likelihood.hpp"
#include "sparch/weights.hpp"

namespace sparch::io {

/// Matrix Market coordinate format (real, integer or pattern; general or
/// symmetric). Symmetric storage is expanded to the full pattern. Explicit
/// diagonal nonzeros, negative weights and duplicate entries are rejected
/// with a ParseError naming the line.
WeightsMatrix read_matrix_market(std::istream& in, const std::string& source = "<stream>");
void write_matrix_market(std::ostream& out, const WeightsMatrix& w);

/// Three-column CSV "i,j,w" with 1-based indices. An optional header row is
/// skipped; lines starting with '#' are comments, and "# dimension: n" fixes
/// the matrix size (otherwise the largest index).
WeightsMatrix read_triplet_csv(std::istream& in, const std::string& source = "<stream>");
void write_triplet_csv(std::ostream& out, const WeightsMatrix& w);

/// Dispatch on extension: ".mtx" is Matrix Market, anything else triplet CSV.
/// Missing files raise InvalidArgument; unreadable ones IoError.
WeightsMatrix load_weights(const std::filesystem::path& path);
void save_weights(const std::filesystem::path& path, const WeightsMatrix& w);

struct Dataset {
  std::vector<std::string> names;  // column names in file order
  Eigen::MatrixXd values;          // one column per name
  std::vector<std::string> ids;    // from an "id" column when present

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  bool has(std::string_view name) const;
  Eigen::VectorXd column(std::string_view name) const;
};

/// Data CSV with a header row. Every cell must parse as a finite number
/// except in an "id" column, whose values must be unique. Empty cells and
/// "NA" are rejected with the row and column.
Dataset read_dataset(std::istream& in, const std::string& source = "<stream>");
Dataset load_dataset(const std::filesystem::path& path);

struct Formula {
  std::string response = "y";
  std::vector<std::string> terms;
  bool intercept = true;

  std::string to_string() const;
};

/// "y ~ 0", "y ~ 1", "y ~ a + b", "y ~ a + b - 1", "y ~ 0 + a".
Formula parse_formula(std::string_view text);

/// FNV-1a 64-bit digest of the dimension and CSR arrays, as 16 hex digits.
std::string weights_digest(const WeightsMatrix& w);
std::string fnv1a_hex(std::string_view bytes);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

/// Writes text to a file, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace sparch::io
