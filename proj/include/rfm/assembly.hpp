#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rfm/errors.hpp"
#include "rfm/features.hpp"
#include "rfm/problem.hpp"

namespace rfm {

/// Interior points x_1..x_{n-2} in (-R, R) followed by the endpoints -R, R.
struct CollocationGrid {
  std::vector<double> interior;
  double R = 1.0;
  double gamma = 1.0;

  std::size_t n() const { return interior.size() + 2; }
};

inline CollocationGrid equidistant_grid(std::size_t n, double R, double gamma = 1.0) {
  if (n < 3) throw std::invalid_argument("equidistant_grid: need n >= 3");
  if (!(R > 0.0)) throw std::invalid_argument("equidistant_grid: R must be positive");
  CollocationGrid g;
  g.R = R;
  g.gamma = gamma;
  g.interior.reserve(n - 2);
  for (std::size_t i = 1; i + 1 < n; ++i)
    g.interior.push_back(-R + 2.0 * R * static_cast<double>(i) / static_cast<double>(n - 1));
  return g;
}

struct RowTag {
  enum class Kind { interior, left, right };
  Kind kind = Kind::interior;
  double x = 0.0;
};

struct ColumnTag {
  int patch = 0;  // 0 for plain assemblies
  TrigKind kind = TrigKind::cos;
  int index = 0;  // local frequency index
};

/// Row sets of one patch, split by the zone of l_p(x_i):
/// A: (-5/4, -3/4), B: [-3/4, 3/4], C: (3/4, 5/4). Columns are [col_begin, col_end).
struct PatchBlockMap {
  std::vector<Eigen::Index> rows_a, rows_b, rows_c;
  Eigen::Index col_begin = 0, col_end = 0;

  Eigen::Index num_cols() const { return col_end - col_begin; }
  std::size_t num_rows() const { return rows_a.size() + rows_b.size() + rows_c.size(); }
};

struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<RowTag> rows;
  std::vector<ColumnTag> cols;
  std::optional<std::vector<PatchBlockMap>> blocks;  // PUM assemblies only
  std::vector<std::string> warnings;

  bool is_pum() const { return blocks.has_value(); }
};

struct Assembly {
  FeatureMatrix matrix;
  Eigen::VectorXd rhs;
};

namespace detail {

inline std::vector<RowTag> make_rows(const CollocationGrid& grid) {
  std::vector<RowTag> rows;
  rows.reserve(grid.n());
  for (double x : grid.interior) rows.push_back({RowTag::Kind::interior, x});
  rows.push_back({RowTag::Kind::left, -grid.R});
  rows.push_back({RowTag::Kind::right, grid.R});
  return rows;
}

inline Eigen::VectorXd make_rhs(const PDEProblem& problem, const CollocationGrid& grid) {
  Eigen::VectorXd F(static_cast<Eigen::Index>(grid.n()));
  for (std::size_t i = 0; i < grid.interior.size(); ++i) F(i) = problem.f(grid.interior[i]);
  const double sg = std::sqrt(grid.gamma);
  F(F.size() - 2) = sg * problem.boundary.g_left;
  F(F.size() - 1) = sg * problem.boundary.g_right;
  return F;
}

inline void check_distinct(const std::vector<double>& k) {
  std::vector<double> sorted = k;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw AssemblyError("repeated frequency in feature sample");
}

}  // namespace detail

/// Collocation matrix of the global trig model:
/// interior rows carry L applied to each feature, boundary rows sqrt(gamma) * B.
inline Assembly assemble_plain(const PDEProblem& problem, const FeatureSample& sample,
                               const CollocationGrid& grid) {
  detail::check_distinct(sample.k);
  const auto N = static_cast<Eigen::Index>(sample.size());
  const auto n = static_cast<Eigen::Index>(grid.n());
  Assembly out;
  auto& m = out.matrix;
  m.values.resize(n, 2 * N);
  m.rows = detail::make_rows(grid);
  m.cols.reserve(2 * N);
  for (int kind = 0; kind < 2; ++kind)
    for (Eigen::Index j = 0; j < N; ++j)
      m.cols.push_back({0, kind == 0 ? TrigKind::cos : TrigKind::sin, static_cast<int>(j)});

  const auto& bc = problem.boundary;
  const double sg = std::sqrt(grid.gamma);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RowTag& row = m.rows[i];
    const double x = row.x;
    double ca = 0, cb = 0, cc = 0;  // multipliers of v'', v', v
    if (row.kind == RowTag::Kind::interior) {
      ca = problem.a(x);
      cb = problem.b(x);
      cc = problem.c(x);
    } else {
      const bool left = row.kind == RowTag::Kind::left;
      cb = sg * (left ? bc.g1_left : bc.g1_right);
      cc = sg * (left ? bc.g2_left : bc.g2_right);
    }
    for (Eigen::Index j = 0; j < 2 * N; ++j) {
      const auto& col = m.cols[j];
      const double k = sample.k[col.index];
      double v = cc * trig_derivative(col.kind, k, x, 0);
      if (cb != 0.0) v += cb * trig_derivative(col.kind, k, x, 1);
      if (ca != 0.0) v += ca * trig_derivative(col.kind, k, x, 2);
      m.values(i, j) = v;
    }
  }
  out.rhs = detail::make_rhs(problem, grid);
  return out;
}

/// Collocation matrix of the partition-of-unity model. Column (p, kind, j) holds
/// L(phi_p v) with v = trig(k_pj l_p(x)), expanded as
///   a phi v'' + (2 a phi' + b phi) v' + (a phi'' + b phi' + c phi) v,
/// and is exactly zero wherever phi_p vanishes.
inline Assembly assemble_pum(const PDEProblem& problem, const GlobalPUMModel& model,
                             const CollocationGrid& grid) {
  const PoUGrid& pou = model.grid;
  const int patches = pou.num_patches();
  const auto Np = static_cast<Eigen::Index>(model.local_frequencies());
  const auto n = static_cast<Eigen::Index>(grid.n());
  const double r = pou.r();
  for (const auto& loc : model.locals) detail::check_distinct(loc.sample().k);

  Assembly out;
  auto& m = out.matrix;
  m.values = Eigen::MatrixXd::Zero(n, 2 * Np * patches);
  m.rows = detail::make_rows(grid);
  std::vector<PatchBlockMap> blocks(patches);
  for (int p = 0; p < patches; ++p) {
    blocks[p].col_begin = 2 * Np * p;
    blocks[p].col_end = 2 * Np * (p + 1);
    for (int kind = 0; kind < 2; ++kind)
      for (Eigen::Index j = 0; j < Np; ++j)
        m.cols.push_back({p, kind == 0 ? TrigKind::cos : TrigKind::sin, static_cast<int>(j)});
  }

  const auto& bc = problem.boundary;
  const double sg = std::sqrt(grid.gamma);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RowTag& row = m.rows[i];
    const double x = row.x;
    for (int p = 0; p < patches; ++p) {
      if (!pou.in_support(p, x)) continue;
      const double t = pou.local_coordinate(p, x);
      auto& blk = blocks[p];
      if (t < -0.75) blk.rows_a.push_back(i);
      else if (t <= 0.75) blk.rows_b.push_back(i);
      else blk.rows_c.push_back(i);

      const double phi0 = pou_bump(t, 0);
      const double phi1 = pou_bump(t, 1) / r;
      const double phi2 = pou_bump(t, 2) / (r * r);
      double w2 = 0, w1 = 0, w0 = 0;  // multipliers of v'', v', v
      if (row.kind == RowTag::Kind::interior) {
        const double a = problem.a(x), b = problem.b(x), c = problem.c(x);
        w2 = a * phi0;
        w1 = 2.0 * a * phi1 + b * phi0;
        w0 = a * phi2 + b * phi1 + c * phi0;
      } else {
        const bool left = row.kind == RowTag::Kind::left;
        const double g1 = sg * (left ? bc.g1_left : bc.g1_right);
        const double g2 = sg * (left ? bc.g2_left : bc.g2_right);
        w1 = g1 * phi0;
        w0 = g1 * phi1 + g2 * phi0;
      }
      const auto& k = model.locals[p].sample().k;
      for (Eigen::Index j = blk.col_begin; j < blk.col_end; ++j) {
        const auto& col = m.cols[j];
        const double kj = k[col.index];
        double v = w0 * trig_derivative(col.kind, kj, t, 0);
        if (w1 != 0.0) v += w1 * trig_derivative(col.kind, kj, t, 1) / r;
        if (w2 != 0.0) v += w2 * trig_derivative(col.kind, kj, t, 2) / (r * r);
        m.values(i, j) = v;
      }
    }
  }
  for (int p = 0; p < patches; ++p) {
    if (blocks[p].num_rows() == 0)
      throw AssemblyError("patch " + std::to_string(p) + " contains no collocation point");
    if (static_cast<Eigen::Index>(blocks[p].rows_b.size()) < 2 * Np)
      m.warnings.push_back("patch " + std::to_string(p) + " has " +
                           std::to_string(blocks[p].rows_b.size()) +
                           " plateau points, fewer than 2*N_p = " + std::to_string(2 * Np));
  }
  m.blocks = std::move(blocks);
  out.rhs = detail::make_rhs(problem, grid);
  return out;
}

struct PatchBlocks {
  Eigen::MatrixXd A, B, C, D;  // D = [A; B; C]
};

namespace detail {

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& src, const std::vector<Eigen::Index>& rows,
                                   Eigen::Index col_begin, Eigen::Index cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = src.block(rows[i], col_begin, 1, cols);
  return out;
}

inline Eigen::MatrixXd block_diagonal(const std::vector<const Eigen::MatrixXd*>& parts) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto* p : parts) {
    rows += p->rows();
    cols += p->cols();
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::Index r0 = 0, c0 = 0;
  for (const auto* p : parts) {
    out.block(r0, c0, p->rows(), p->cols()) = *p;
    r0 += p->rows();
    c0 += p->cols();
  }
  return out;
}

}  // namespace detail

/// Copies of A_p, B_p, C_p and D_p for every patch.
inline std::vector<PatchBlocks> extract_blocks(const FeatureMatrix& m) {
  if (!m.is_pum()) throw UnsupportedError("extract_blocks: matrix was not assembled with PUM");
  std::vector<PatchBlocks> out;
  for (const auto& blk : *m.blocks) {
    PatchBlocks pb;
    const auto nc = blk.num_cols();
    pb.A = detail::gather_rows(m.values, blk.rows_a, blk.col_begin, nc);
    pb.B = detail::gather_rows(m.values, blk.rows_b, blk.col_begin, nc);
    pb.C = detail::gather_rows(m.values, blk.rows_c, blk.col_begin, nc);
    pb.D.resize(pb.A.rows() + pb.B.rows() + pb.C.rows(), nc);
    pb.D << pb.A, pb.B, pb.C;
    out.push_back(std::move(pb));
  }
  return out;
}

struct BlockDiagonalComparison {
  Eigen::MatrixXd B_diag;  // diag(B_0, ..., B_P)
  Eigen::MatrixXd D_even;  // diag(D_0, D_2, ...)
  Eigen::MatrixXd D_odd;   // diag(D_1, D_3, ...)
};

inline BlockDiagonalComparison blockdiag_compare(const std::vector<PatchBlocks>& blocks) {
  std::vector<const Eigen::MatrixXd*> bs, even, odd;
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    bs.push_back(&blocks[p].B);
    (p % 2 == 0 ? even : odd).push_back(&blocks[p].D);
  }
  return {detail::block_diagonal(bs), detail::block_diagonal(even), detail::block_diagonal(odd)};
}

inline BlockDiagonalComparison blockdiag_compare(const FeatureMatrix& m) {
  if (!m.is_pum()) throw UnsupportedError("blockdiag_compare: matrix was not assembled with PUM");
  return blockdiag_compare(extract_blocks(m));
}

/// Dense CSV, one matrix row per line.
inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  os << "# rfm matrix v1 rows=" << m.rows() << " cols=" << m.cols() << "\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
    os << "\n";
  }
}

/// "row col value" for every exact nonzero, zero-based.
inline void write_sparsity_triplets(std::ostream& os, const Eigen::MatrixXd& m) {
  os << "# rfm triplets v1 rows=" << m.rows() << " cols=" << m.cols() << "\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) os << i << " " << j << " " << m(i, j) << "\n";
}

}  // namespace rfm
