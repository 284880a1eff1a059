#include "sparch/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sparch/error.hpp"

namespace sparch::io {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_index(const std::string& s, std::size_t& v) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct RawEntry {
  std::size_t row;
  std::size_t col;
  double value;
  std::size_t line;
};

WeightsMatrix assemble(std::size_t n, const std::vector<RawEntry>& raw, const std::string& source) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
  std::vector<WeightsMatrix::Entry> entries;
  entries.reserve(raw.size());
  for (const auto& e : raw) {
    const std::string at = "(" + std::to_string(e.row + 1) + ", " + std::to_string(e.col + 1) + ")";
    if (e.row >= n || e.col >= n) {
      throw ParseError(source, e.line, 1,
                       "entry " + at + " outside a " + std::to_string(n) + " x " +
                           std::to_string(n) + " matrix");
    }
    if (!std::isfinite(e.value)) throw ParseError(source, e.line, 3, "non-finite weight at " + at);
    if (e.value < 0.0) throw ParseError(source, e.line, 3, "negative weight at " + at);
    if (e.row == e.col && e.value != 0.0) {
      throw ParseError(source, e.line, 1, "nonzero diagonal entry " + at + " is not allowed");
    }
    const auto [it, fresh] = seen.emplace(std::make_pair(e.row, e.col), e.line);
    if (!fresh) {
      throw ParseError(source, e.line, 1,
                       "duplicate entry " + at + " (first given on line " +
                           std::to_string(it->second) + ")");
    }
    entries.push_back({e.row, e.col, e.value});
  }
  return WeightsMatrix::from_entries(n, entries);
}

}  // namespace

WeightsMatrix read_matrix_market(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, 1, "empty Matrix Market file");
  ++lineno;
  const auto head = split_ws(lower(line));
  if (head.size() < 5 || head[0] != "%%matrixmarket" || head[1] != "matrix") {
    throw ParseError(source, 1, 1, "missing '%%MatrixMarket matrix' banner");
  }
  if (head[2] != "coordinate") throw ParseError(source, 1, 1, "only coordinate format is supported");
  const std::string field = head[3];
  if (field != "real" && field != "integer" && field != "pattern" && field != "double") {
    throw ParseError(source, 1, 1, "unsupported field '" + field + "'");
  }
  const std::string symmetry = head[4];
  if (symmetry != "general" && symmetry != "symmetric") {
    throw ParseError(source, 1, 1, "unsupported symmetry '" + symmetry + "'");
  }
  const bool pattern = field == "pattern";
  const bool symmetric = symmetry == "symmetric";

  std::size_t n = 0;
  std::size_t nnz = 0;
  bool have_size = false;
  std::vector<RawEntry> raw;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    const auto tok = split_ws(t);
    if (!have_size) {
      std::size_t rows = 0;
      std::size_t cols = 0;
      if (tok.size() != 3 || !parse_index(tok[0], rows) || !parse_index(tok[1], cols) ||
          !parse_index(tok[2], nnz)) {
        throw ParseError(source, lineno, 1, "expected 'rows cols nonzeros'");
      }
      if (rows != cols) {
        throw ParseError(source, lineno, 1,
                         "weights matrix must be square, got " + tok[0] + " x " + tok[1]);
      }
      n = rows;
      have_size = true;
      continue;
    }
    const std::size_t want = pattern ? 2 : 3;
    std::size_t i = 0;
    std::size_t j = 0;
    double v = 1.0;
    if (tok.size() != want) {
      throw ParseError(source, lineno, 1, "expected " + std::to_string(want) + " fields");
    }
    if (!parse_index(tok[0], i) || i == 0) throw ParseError(source, lineno, 1, "bad row index '" + tok[0] + "'");
    if (!parse_index(tok[1], j) || j == 0) throw ParseError(source, lineno, 2, "bad column index '" + tok[1] + "'");
    if (!pattern && !parse_double(tok[2], v)) throw ParseError(source, lineno, 3, "bad value '" + tok[2] + "'");
    raw.push_back({i - 1, j - 1, v, lineno});
    if (symmetric && i != j) raw.push_back({j - 1, i - 1, v, lineno});
  }
  if (!have_size) throw ParseError(source, lineno, 1, "missing size line");
  const std::size_t stored = symmetric
                                 ? static_cast<std::size_t>(std::count_if(
                                       raw.begin(), raw.end(), [](const RawEntry& e) { return e.row >= e.col; }))
                                 : raw.size();
  if (stored != nnz) {
    throw ParseError(source, lineno, 1,
                     "header announces " + std::to_string(nnz) + " entries but " +
                         std::to_string(stored) + " were read");
  }
  return assemble(n, raw, source);
}

void write_matrix_market(std::ostream& out, const WeightsMatrix& w) {
  const auto entries = w.entries();
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << w.size() << ' ' << w.size() << ' ' << entries.size() << '\n';
  for (const auto& e : entries) {
    out << (e.row + 1) << ' ' << (e.col + 1) << ' ' << format_double(e.value) << '\n';
  }
}

WeightsMatrix read_triplet_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t declared = 0;
  bool have_dim = false;
  bool first_data = true;
  std::size_t max_index = 0;
  std::vector<RawEntry> raw;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = lower(trim(t.substr(1)));
      if (body.rfind("dimension:", 0) == 0) {
        if (!parse_index(trim(body.substr(10)), declared)) {
          throw ParseError(source, lineno, 1, "bad dimension comment");
        }
        have_dim = true;
      }
      continue;
    }
    const auto cells = split(t, ',');
    if (cells.size() != 3) {
      throw ParseError(source, lineno, 1,
                       "expected 3 columns (i, j, w), got " + std::to_string(cells.size()));
    }
    std::size_t i = 0;
    std::size_t j = 0;
    double v = 0.0;
    const bool ok_i = parse_index(cells[0], i);
    if (first_data && !ok_i) {
      first_data = false;  // header row
      continue;
    }
    first_data = false;
    if (!ok_i || i == 0) throw ParseError(source, lineno, 1, "bad row index '" + cells[0] + "'");
    if (!parse_index(cells[1], j) || j == 0) throw ParseError(source, lineno, 2, "bad column index '" + cells[1] + "'");
    if (!parse_double(cells[2], v)) throw ParseError(source, lineno, 3, "bad weight '" + cells[2] + "'");
    max_index = std::max({max_index, i, j});
    raw.push_back({i - 1, j - 1, v, lineno});
  }
  const std::size_t n = have_dim ? declared : max_index;
  if (n == 0) throw ParseError(source, lineno, 1, "no entries and no dimension comment");
  return assemble(n, raw, source);
}

void write_triplet_csv(std::ostream& out, const WeightsMatrix& w) {
  out << "# dimension: " << w.size() << '\n';
  out << "i,j,w\n";
  for (const auto& e : w.entries()) {
    out << (e.row + 1) << ',' << (e.col + 1) << ',' << format_double(e.value) << '\n';
  }
}

WeightsMatrix load_weights(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw InvalidArgument("weights file '" + path.string() + "' does not exist");
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open weights file '" + path.string() + "'");
  if (lower(path.extension().string()) == ".mtx") return read_matrix_market(in, path.string());
  return read_triplet_csv(in, path.string());
}

void save_weights(const std::filesystem::path& path, const WeightsMatrix& w) {
  std::ostringstream out;
  if (lower(path.extension().string()) == ".mtx") {
    write_matrix_market(out, w);
  } else {
    write_triplet_csv(out, w);
  }
  write_text(path, out.str());
}

bool Dataset::has(std::string_view name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

Eigen::VectorXd Dataset::column(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InvalidArgument("data has no column '" + std::string(name) + "'");
  return values.col(it - names.begin());
}

Dataset read_dataset(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    header = split(t, ',');
  }
  if (header.empty()) throw ParseError(source, std::max<std::size_t>(lineno, 1), 1, "missing header row");
  std::set<std::string> unique;
  int id_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw ParseError(source, lineno, c + 1, "empty column name");
    if (!unique.insert(header[c]).second) {
      throw ParseError(source, lineno, c + 1, "duplicate column name '" + header[c] + "'");
    }
    if (header[c] == "id") id_col = static_cast<int>(c);
  }

  Dataset d;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<int>(c) != id_col) d.names.push_back(header[c]);
  }
  std::vector<std::vector<double>> rows;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split(t, ',');
    if (cells.size() != header.size()) {
      throw ParseError(source, lineno, std::min(cells.size(), header.size()) + 1,
                       "expected " + std::to_string(header.size()) + " columns, got " +
                           std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(d.names.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (static_cast<int>(c) == id_col) {
        if (cells[c].empty()) throw ParseError(source, lineno, c + 1, "empty id");
        if (!seen_ids.insert(cells[c]).second) {
          throw ParseError(source, lineno, c + 1, "duplicate id '" + cells[c] + "'");
        }
        d.ids.push_back(cells[c]);
        continue;
      }
      double v = 0.0;
      if (cells[c].empty() || lower(cells[c]) == "na") {
        throw ParseError(source, lineno, c + 1, "missing value in column '" + header[c] + "'");
      }
      if (!parse_double(cells[c], v) || !std::isfinite(v)) {
        throw ParseError(source, lineno, c + 1,
                         "cannot parse '" + cells[c] + "' in column '" + header[c] + "' as a number");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  d.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < d.names.size(); ++c) {
      d.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw InvalidArgument("data file '" + path.string() + "' does not exist");
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path.string() + "'");
  return read_dataset(in, path.string());
}

std::string Formula::to_string() const {
  std::string f = response + " ~ ";
  if (terms.empty()) return f + (intercept ? "1" : "0");
  if (!intercept) f += "0 + ";
  for (std::size_t i = 0; i < terms.size(); ++i) f += (i ? " + " : "") + terms[i];
  return f;
}

Formula parse_formula(std::string_view text) {
  const auto tilde = text.find('~');
  if (tilde == std::string_view::npos) {
    throw InvalidArgument("formula '" + std::string(text) + "' has no '~'");
  }
  Formula f;
  f.response = trim(text.substr(0, tilde));
  if (f.response.empty()) throw InvalidArgument("formula has no response");
  const std::string rhs = trim(text.substr(tilde + 1));
  if (rhs.empty()) throw InvalidArgument("formula has an empty right-hand side");

  std::size_t pos = 0;
  char sign = '+';
  while (pos <= rhs.size()) {
    std::size_t next = rhs.find_first_of("+-", pos);
    const std::string term = trim(rhs.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (term.empty()) throw InvalidArgument("formula '" + std::string(text) + "' has an empty term");
    if (term == "0") {
      if (sign == '-') throw InvalidArgument("'- 0' is not supported");
      f.intercept = false;
    } else if (term == "1") {
      f.intercept = sign == '+';
    } else {
      for (char c : term) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) {
          throw InvalidArgument("unsupported term '" + term + "' (plain column names only)");
        }
      }
      if (sign == '-') {
        f.terms.erase(std::remove(f.terms.begin(), f.terms.end(), term), f.terms.end());
      } else if (std::find(f.terms.begin(), f.terms.end(), term) == f.terms.end()) {
        f.terms.push_back(term);
      }
    }
    if (next == std::string::npos) break;
    sign = rhs[next];
    pos = next + 1;
  }
  return f;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string weights_digest(const WeightsMatrix& w) {
  const auto v = w.csr();
  std::string bytes;
  const std::uint64_t n = w.size();
  bytes.append(reinterpret_cast<const char*>(&n), sizeof n);
  bytes.append(reinterpret_cast<const char*>(v.row_ptr.data()), v.row_ptr.size_bytes());
  bytes.append(reinterpret_cast<const char*>(v.col_idx.data()), v.col_idx.size_bytes());
  bytes.append(reinterpret_cast<const char*>(v.values.data()), v.values.size_bytes());
  return fnv1a_hex(bytes);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sparch::io
