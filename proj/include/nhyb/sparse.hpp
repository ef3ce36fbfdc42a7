#pragma once

/// Compressed sparse row storage and pattern-first assembly.

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>
#include <span>
#include <tuple>
#include <vector>

#include "core.hpp"

namespace nhyb {

class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr, std::vector<int> col_idx,
              std::vector<double> values)
        : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {}

    /// Duplicate (i, j) entries are summed.
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<std::tuple<int, int, double>> triplets) {
        std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
        });
        std::vector<std::size_t> ptr(rows + 1, 0);
        std::vector<int> cols_out;
        std::vector<double> vals;
        for (std::size_t k = 0; k < triplets.size();) {
            const auto [i, j, v0] = triplets[k];
            double v = v0;
            std::size_t m = k + 1;
            while (m < triplets.size() && std::get<0>(triplets[m]) == i && std::get<1>(triplets[m]) == j)
                v += std::get<2>(triplets[m++]);
            cols_out.push_back(j);
            vals.push_back(v);
            ++ptr[static_cast<std::size_t>(i) + 1];
            k = m;
        }
        for (std::size_t r = 0; r < rows; ++r) ptr[r + 1] += ptr[r];
        return CsrMatrix(rows, cols, std::move(ptr), std::move(cols_out), std::move(vals));
    }

    static CsrMatrix identity(std::size_t n) {
        std::vector<std::size_t> ptr(n + 1);
        std::vector<int> cols(n);
        for (std::size_t i = 0; i < n; ++i) {
            ptr[i + 1] = i + 1;
            cols[i] = static_cast<int>(i);
        }
        return CsrMatrix(n, n, std::move(ptr), std::move(cols), std::vector<double>(n, 1.0));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nonzeros() const { return values_.size(); }
    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// Adds v to an entry that must exist in the pattern.
    void add(int i, int j, double v) {
        const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[static_cast<std::size_t>(i)]);
        const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[static_cast<std::size_t>(i) + 1]);
        const auto it = std::lower_bound(first, last, j);
        require(it != last && *it == j, ErrorCode::InvalidArgument, "entry outside sparsity pattern");
        values_[static_cast<std::size_t>(it - col_idx_.begin())] += v;
    }

    double at(int i, int j) const {
        const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[static_cast<std::size_t>(i)]);
        const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[static_cast<std::size_t>(i) + 1]);
        const auto it = std::lower_bound(first, last, j);
        return (it != last && *it == j) ? values_[static_cast<std::size_t>(it - col_idx_.begin())] : 0.0;
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[static_cast<std::size_t>(col_idx_[k])];
            y[i] = s;
        }
    }

    std::vector<double> operator*(std::span<const double> x) const {
        std::vector<double> y(rows_);
        multiply(x, y);
        return y;
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) d[i] = at(static_cast<int>(i), static_cast<int>(i));
        return d;
    }

    /// max |A - A^T| over stored entries.
    double asymmetry() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                worst = std::max(worst, std::abs(values_[k] - at(col_idx_[k], static_cast<int>(i))));
        return worst;
    }

    /// x^T A y.
    double bilinear(std::span<const double> x, std::span<const double> y) const {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double row = 0.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) row += values_[k] * y[static_cast<std::size_t>(col_idx_[k])];
            s += x[i] * row;
        }
        return s;
    }

    std::vector<std::vector<double>> to_dense() const {
        std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d[i][static_cast<std::size_t>(col_idx_[k])] += values_[k];
        return d;
    }

    /// Drops stored entries with |a_ij| <= tol.
    CsrMatrix pruned(double tol = 0.0) const {
        std::vector<std::size_t> ptr(rows_ + 1, 0);
        std::vector<int> cols;
        std::vector<double> vals;
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                if (std::abs(values_[k]) <= tol && col_idx_[k] != static_cast<int>(i)) continue;
                cols.push_back(col_idx_[k]);
                vals.push_back(values_[k]);
            }
            ptr[i + 1] = cols.size();
        }
        return CsrMatrix(rows_, cols_, std::move(ptr), std::move(cols), std::move(vals));
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

/// Collects the union of dense element blocks, then produces a zero-valued CSR.
class SparsityBuilder {
public:
    explicit SparsityBuilder(std::size_t n) : rows_(n) {}

    void add_block(std::span<const int> dofs) {
        for (int i : dofs)
            for (int j : dofs) rows_[static_cast<std::size_t>(i)].push_back(j);
    }
    void add_block(std::span<const int> row_dofs, std::span<const int> col_dofs) {
        for (int i : row_dofs)
            for (int j : col_dofs) rows_[static_cast<std::size_t>(i)].push_back(j);
    }
    void compact() {
        for (auto& r : rows_) {
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
            r.shrink_to_fit();
        }
    }

    CsrMatrix build() {
        compact();
        std::vector<std::size_t> ptr(rows_.size() + 1, 0);
        for (std::size_t i = 0; i < rows_.size(); ++i) ptr[i + 1] = ptr[i] + rows_[i].size();
        std::vector<int> cols;
        cols.reserve(ptr.back());
        for (auto& r : rows_) {
            cols.insert(cols.end(), r.begin(), r.end());
            std::vector<int>().swap(r);
        }
        const std::size_t nnz = cols.size();
        return CsrMatrix(rows_.size(), rows_.size(), std::move(ptr), std::move(cols), std::vector<double>(nnz, 0.0));
    }

private:
    std::vector<std::vector<int>> rows_;
};

/// Dense blocks stored back to back: block b covers dofs[ptr[b] .. ptr[b+1]).
struct BlockList {
    std::vector<std::size_t> ptr{0};
    std::vector<int> dofs;

    void add(std::span<const int> block) {
        dofs.insert(dofs.end(), block.begin(), block.end());
        ptr.push_back(dofs.size());
    }
    std::size_t size() const { return ptr.size() - 1; }
};

/// Zero-valued n x n CSR whose pattern is the union of the blocks' dense couplings.
/// Works through a dof -> block incidence table, so memory stays linear in the
/// number of blocks even for very large uniform meshes.
inline CsrMatrix pattern_from_blocks(std::size_t n, const BlockList& blocks) {
    std::vector<std::size_t> start(n + 1, 0);
    for (int d : blocks.dofs) ++start[static_cast<std::size_t>(d) + 1];
    for (std::size_t i = 0; i < n; ++i) start[i + 1] += start[i];
    std::vector<int> incident(start.back());
    {
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (std::size_t b = 0; b < blocks.size(); ++b)
            for (std::size_t k = blocks.ptr[b]; k < blocks.ptr[b + 1]; ++k)
                incident[fill[static_cast<std::size_t>(blocks.dofs[k])]++] = static_cast<int>(b);
    }
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<int> cols;
    std::vector<int> scratch;
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
            scratch.clear();
            for (std::size_t k = start[i]; k < start[i + 1]; ++k) {
                const std::size_t b = static_cast<std::size_t>(incident[k]);
                scratch.insert(scratch.end(), blocks.dofs.begin() + static_cast<std::ptrdiff_t>(blocks.ptr[b]),
                               blocks.dofs.begin() + static_cast<std::ptrdiff_t>(blocks.ptr[b + 1]));
            }
            if (scratch.empty()) scratch.push_back(static_cast<int>(i));
            std::sort(scratch.begin(), scratch.end());
            scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
            if (pass == 0)
                row_ptr[i + 1] = row_ptr[i] + scratch.size();
            else
                std::copy(scratch.begin(), scratch.end(), cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]));
        }
        if (pass == 0) cols.resize(row_ptr.back());
    }
    const std::size_t nnz = cols.size();
    return CsrMatrix(n, n, std::move(row_ptr), std::move(cols), std::vector<double>(nnz, 0.0));
}

/// Coordinate text dump: one "i j value" line per stored entry (0-based).
inline void write_triplets(std::ostream& os, const CsrMatrix& a) {
    os << std::setprecision(17);
    os << "# rows " << a.rows() << " cols " << a.cols() << " nnz " << a.nonzeros() << '\n';
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            os << i << ' ' << a.col_idx()[k] << ' ' << a.values()[k] << '\n';
}

inline void write_vector(std::ostream& os, std::span<const double> v) {
    os << std::setprecision(17);
    os << "# size " << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) os << i << ' ' << v[i] << '\n';
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace nhyb
