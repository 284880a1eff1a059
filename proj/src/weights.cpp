#include "sparch/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>

#include "sparch/error.hpp"

namespace sparch {
namespace {

using Triplet = Eigen::Triplet<double, int>;

std::string at(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")";
}

void check_rows_standardized(const WeightsMatrix& w) {
  if (!w.rows_sum_to_one()) {
    throw InvalidArgument("weights flagged row-standardized but a nonzero row does not sum to 1");
  }
}

}  // namespace

WeightsMatrix::WeightsMatrix(Sparse m, bool row_standardized)
    : m_(std::move(m)), row_standardized_(row_standardized) {}

WeightsMatrix WeightsMatrix::from_entries(std::size_t n, std::span<const Entry> entries,
                                          bool row_standardized) {
  if (n > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw InvalidArgument("weights dimension too large");
  }
  std::vector<Triplet> triplets;
  triplets.reserve(entries.size());
  std::vector<std::pair<std::size_t, std::size_t>> seen;
  seen.reserve(entries.size());
  for (const Entry& e : entries) {
    if (e.row >= n || e.col >= n) {
      throw InvalidArgument("weight entry " + at(e.row, e.col) + " outside a " +
                            std::to_string(n) + " x " + std::to_string(n) + " matrix");
    }
    if (!std::isfinite(e.value)) throw InvalidArgument("non-finite weight at " + at(e.row, e.col));
    if (e.value < 0.0) throw InvalidArgument("negative weight at " + at(e.row, e.col));
    if (e.row == e.col && e.value != 0.0) {
      throw InvalidArgument("nonzero diagonal weight at " + at(e.row, e.col));
    }
    seen.emplace_back(e.row, e.col);
    if (e.value != 0.0) {
      triplets.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
    }
  }
  std::sort(seen.begin(), seen.end());
  if (auto dup = std::adjacent_find(seen.begin(), seen.end()); dup != seen.end()) {
    throw InvalidArgument("duplicate weight entry " + at(dup->first, dup->second));
  }
  Sparse m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  WeightsMatrix w(std::move(m), row_standardized);
  if (row_standardized) check_rows_standardized(w);
  return w;
}

WeightsMatrix WeightsMatrix::from_sparse(Sparse m, bool row_standardized) {
  if (m.rows() != m.cols()) throw InvalidArgument("weights matrix must be square");
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (int r = 0; r < m.outerSize(); ++r) {
    for (Sparse::InnerIterator it(m, r); it; ++it) {
      entries.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()),
                         it.value()});
    }
  }
  return from_entries(static_cast<std::size_t>(m.rows()), entries, row_standardized);
}

WeightsMatrix WeightsMatrix::from_dense(const Eigen::MatrixXd& m, bool row_standardized) {
  if (m.rows() != m.cols()) throw InvalidArgument("weights matrix must be square");
  std::vector<Entry> entries;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        entries.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), m(i, j)});
      }
    }
  }
  return from_entries(static_cast<std::size_t>(m.rows()), entries, row_standardized);
}

WeightsMatrix WeightsMatrix::zero(std::size_t n) { return from_entries(n, {}, false); }

kernels::CsrView WeightsMatrix::csr() const noexcept {
  const auto rows = static_cast<std::size_t>(m_.rows());
  const auto nnz = static_cast<std::size_t>(m_.nonZeros());
  return {rows,
          {m_.outerIndexPtr(), rows + 1},
          {m_.innerIndexPtr(), nnz},
          {m_.valuePtr(), nnz}};
}

std::vector<WeightsMatrix::Entry> WeightsMatrix::entries() const {
  std::vector<Entry> out;
  out.reserve(nonzeros());
  for (int r = 0; r < m_.outerSize(); ++r) {
    for (Sparse::InnerIterator it(m_, r); it; ++it) {
      out.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()),
                     it.value()});
    }
  }
  return out;
}

Eigen::VectorXd WeightsMatrix::row_sums() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m_.rows());
  for (int r = 0; r < m_.outerSize(); ++r) {
    for (Sparse::InnerIterator it(m_, r); it; ++it) s[r] += it.value();
  }
  return s;
}

Eigen::VectorXd WeightsMatrix::col_sums() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m_.cols());
  for (int r = 0; r < m_.outerSize(); ++r) {
    for (Sparse::InnerIterator it(m_, r); it; ++it) s[it.col()] += it.value();
  }
  return s;
}

bool WeightsMatrix::rows_sum_to_one() const {
  const Eigen::VectorXd s = row_sums();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] != 0.0 && std::abs(s[i] - 1.0) > 1e-12) return false;
  }
  return true;
}

WeightsMatrix WeightsMatrix::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != size()) throw InvalidArgument("permutation length does not match weights");
  std::vector<bool> hit(perm.size(), false);
  for (std::size_t p : perm) {
    if (p >= perm.size() || hit[p]) throw InvalidArgument("not a permutation");
    hit[p] = true;
  }
  std::vector<Entry> out = entries();
  for (Entry& e : out) {
    e.row = perm[e.row];
    e.col = perm[e.col];
  }
  return from_entries(size(), out, row_standardized_);
}

bool WeightsMatrix::operator==(const WeightsMatrix& other) const {
  return size() == other.size() && row_standardized_ == other.row_standardized_ &&
         entries() == other.entries();
}

WeightsMatrix build_lattice_contiguity(const LatticeSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw InvalidArgument("lattice needs rows, cols >= 1");
  const std::size_t n = spec.rows * spec.cols;
  std::vector<WeightsMatrix::Entry> entries;
  entries.reserve(n * (spec.scheme == Contiguity::queen ? 8 : 4));
  const auto rows = static_cast<long>(spec.rows);
  const auto cols = static_cast<long>(spec.cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (spec.scheme == Contiguity::rook && dr != 0 && dc != 0) continue;
          const long rr = r + dr;
          const long cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          entries.push_back({static_cast<std::size_t>(r * cols + c),
                             static_cast<std::size_t>(rr * cols + cc), 1.0});
        }
      }
    }
  }
  return WeightsMatrix::from_entries(n, entries, false);
}

WeightsMatrix row_standardize(const WeightsMatrix& w) {
  if (w.row_standardized()) return w;
  const Eigen::VectorXd sums = w.row_sums();
  std::vector<WeightsMatrix::Entry> entries = w.entries();
  for (auto& e : entries) e.value /= sums[static_cast<Eigen::Index>(e.row)];
  return WeightsMatrix::from_entries(w.size(), entries, true);
}

WeightsMatrix higher_order_sum(const WeightsMatrix& w, int max_lag) {
  if (max_lag < 1) throw InvalidArgument("max_lag must be >= 1");
  const std::size_t n = w.size();
  const auto csr = w.csr();
  std::vector<WeightsMatrix::Entry> entries;
  std::vector<int> depth(n, -1);
  std::vector<std::size_t> frontier;
  std::vector<std::size_t> next;
  std::vector<std::size_t> touched;
  for (std::size_t src = 0; src < n; ++src) {
    frontier.assign(1, src);
    depth[src] = 0;
    touched.assign(1, src);
    for (int lag = 1; lag <= max_lag && !frontier.empty(); ++lag) {
      next.clear();
      for (std::size_t u : frontier) {
        for (int k = csr.row_ptr[u]; k < csr.row_ptr[u + 1]; ++k) {
          const auto v = static_cast<std::size_t>(csr.col_idx[k]);
          if (depth[v] >= 0) continue;
          depth[v] = lag;
          touched.push_back(v);
          next.push_back(v);
        }
      }
      frontier.swap(next);
    }
    std::vector<std::size_t> reached;
    for (std::size_t v : touched) {
      if (v != src) reached.push_back(v);
    }
    std::sort(reached.begin(), reached.end());
    for (std::size_t v : reached) entries.push_back({src, v, 1.0});
    for (std::size_t v : touched) depth[v] = -1;
  }
  return WeightsMatrix::from_entries(n, entries, false);
}

std::optional<std::vector<std::size_t>> triangular_order(const WeightsMatrix& w) {
  const std::size_t n = w.size();
  const auto csr = w.csr();
  // Location i depends on j when w_ij > 0; i may only be listed after all of
  // its dependencies.
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> dependents(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = csr.row_ptr[i]; k < csr.row_ptr[i + 1]; ++k) {
      dependents[static_cast<std::size_t>(csr.col_idx[k])].push_back(i);
      ++pending[i];
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t u = ready.top();
    ready.pop();
    order.push_back(u);
    for (std::size_t v : dependents[u]) {
      if (--pending[v] == 0) ready.push(v);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

double squared_l1_norm(const WeightsMatrix& w) {
  const WeightsMatrix::Sparse w2 = (w.sparse() * w.sparse()).pruned();
  Eigen::VectorXd colsum = Eigen::VectorXd::Zero(w2.cols());
  for (int r = 0; r < w2.outerSize(); ++r) {
    for (WeightsMatrix::Sparse::InnerIterator it(w2, r); it; ++it) {
      colsum[it.col()] += std::abs(it.value());
    }
  }
  return colsum.size() == 0 ? 0.0 : colsum.maxCoeff();
}

double truncation_bound(const WeightsMatrix& w, double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be finite and >= 0");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (rho == 0.0 || is_strictly_triangularizable(w)) return inf;
  const double norm = rho * rho * squared_l1_norm(w);
  // A cyclic nonnegative W has a positive W^2 entry on its cycle.
  if (norm <= 0.0) return inf;
  return 1.0 / std::pow(norm, 0.25);
}

WeightsMatrix SpatioTemporalWeights::combined(double rho) const {
  if (!(rho >= 0.0)) throw InvalidArgument("rho must be >= 0");
  WeightsMatrix::Sparse acc = rho * spatial_part.sparse();
  for (std::size_t k = 0; k < temporal_parts.size(); ++k) {
    acc += temporal_weights[k] * temporal_parts[k].sparse();
  }
  acc.prune(0.0);
  acc.makeCompressed();
  return WeightsMatrix::from_sparse(std::move(acc), false);
}

SpatioTemporalWeights build_spatiotemporal_weights(const SpatioTemporalSpec& spec) {
  if (spec.spatial.empty()) throw InvalidArgument("need at least one period");
  const std::size_t periods = spec.spatial.size();
  const std::size_t locations = spec.spatial.front().size();
  for (std::size_t t = 0; t < periods; ++t) {
    if (spec.spatial[t].size() != locations) {
      throw InvalidArgument("spatial matrix for period " + std::to_string(t + 1) + " is " +
                            std::to_string(spec.spatial[t].size()) + " x " +
                            std::to_string(spec.spatial[t].size()) + ", expected " +
                            std::to_string(locations) + " x " + std::to_string(locations));
    }
  }
  if (spec.temporal.size() >= periods) {
    throw InvalidArgument("number of temporal lags must be smaller than the number of periods");
  }
  for (double phi : spec.temporal) {
    if (!(phi >= 0.0) || !std::isfinite(phi)) {
      throw InvalidArgument("temporal weights must be finite and >= 0");
    }
  }

  const std::size_t n = locations * periods;
  std::vector<WeightsMatrix::Entry> block;
  for (std::size_t t = 0; t < periods; ++t) {
    for (const auto& e : spec.spatial[t].entries()) {
      block.push_back({t * locations + e.row, t * locations + e.col, e.value});
    }
  }
  SpatioTemporalWeights out;
  out.locations = locations;
  out.periods = periods;
  out.spatial_part = WeightsMatrix::from_entries(n, block, false);
  out.temporal_weights = spec.temporal;
  for (std::size_t lag = 1; lag <= spec.temporal.size(); ++lag) {
    std::vector<WeightsMatrix::Entry> shift;
    for (std::size_t t = lag; t < periods; ++t) {
      for (std::size_t s = 0; s < locations; ++s) {
        shift.push_back({t * locations + s, (t - lag) * locations + s, 1.0});
      }
    }
    out.temporal_parts.push_back(WeightsMatrix::from_entries(n, shift, false));
  }
  return out;
}

bool respects_time_order(const WeightsMatrix& w, std::size_t locations, std::size_t periods) {
  if (locations == 0 || w.size() != locations * periods) {
    throw InvalidArgument("weights size does not match locations x periods");
  }
  for (const auto& e : w.entries()) {
    const std::size_t ti = e.row / locations;
    const std::size_t tj = e.col / locations;
    if (ti != tj && tj >= ti) return false;
  }
  return true;
}

}  // namespace sparch
