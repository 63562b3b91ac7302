#include "npmle/binary_matrix.hpp"

#include "npmle/error.hpp"

#include <string>

namespace npmle {

BinaryMatrix::BinaryMatrix(std::size_t rows, const std::vector<SignVector>& columns)
    : rows_(rows), cols_(columns.size()) {
    for (const auto& c : columns) {
        if (c.size() != rows) throw InputError("BinaryMatrix: column length differs from row count");
        nnz_ += c.count_positive();
    }
    double fill = rows_ * cols_ == 0 ? 0.0 : static_cast<double>(nnz_) / (static_cast<double>(rows_) * cols_);
    storage_ = fill > 0.25 ? Storage::Dense : Storage::Sparse;
    if (storage_ == Storage::Dense) {
        words_per_col_ = (rows_ + 63) / 64;
        bits_.assign(words_per_col_ * cols_, 0);
        for (std::size_t j = 0; j < cols_; ++j) {
            const auto& w = columns[j].words();
            std::copy(w.begin(), w.end(), bits_.begin() + static_cast<std::ptrdiff_t>(j * words_per_col_));
        }
    } else {
        col_ptr_.assign(cols_ + 1, 0);
        row_idx_.reserve(nnz_);
        for (std::size_t j = 0; j < cols_; ++j) {
            const auto& w = columns[j].words();
            for (std::size_t k = 0; k < w.size(); ++k) {
                std::uint64_t b = w[k];
                while (b) {
                    row_idx_.push_back(static_cast<std::uint32_t>(64 * k + std::countr_zero(b)));
                    b &= b - 1;
                }
            }
            col_ptr_[j + 1] = row_idx_.size();
        }
    }
}

BinaryMatrix BinaryMatrix::from_dense(const std::vector<std::vector<double>>& rows) {
    std::size_t n = rows.size();
    std::size_t m = n ? rows[0].size() : 0;
    std::vector<SignVector> cols(m, SignVector(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != m) throw InputError("BinaryMatrix: ragged rows");
        for (std::size_t j = 0; j < m; ++j) {
            double a = rows[i][j];
            if (a != 0.0 && a != 1.0)
                throw InputError("BinaryMatrix: non-binary entry at (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
            cols[j].set(i, a == 1.0);
        }
    }
    return BinaryMatrix(n, cols);
}

std::size_t BinaryMatrix::column_count(std::size_t j) const {
    if (storage_ == Storage::Sparse) return col_ptr_[j + 1] - col_ptr_[j];
    std::size_t c = 0;
    for (std::size_t k = 0; k < words_per_col_; ++k) c += std::popcount(bits_[j * words_per_col_ + k]);
    return c;
}

bool BinaryMatrix::get(std::size_t i, std::size_t j) const {
    if (storage_ == Storage::Dense) return (bits_[j * words_per_col_ + (i >> 6)] >> (i & 63)) & 1u;
    for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        if (row_idx_[k] == i) return true;
    return false;
}

std::vector<double> BinaryMatrix::times(std::span<const double> p) const {
    if (p.size() != cols_) throw InputError("BinaryMatrix::times: dimension mismatch");
    std::vector<double> g(rows_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
        double pj = p[j];
        if (pj == 0.0) continue;
        for_each_in_column(j, [&](std::size_t i) { g[i] += pj; });
    }
    return g;
}

std::vector<double> BinaryMatrix::transpose_times(std::span<const double> q) const {
    if (q.size() != rows_) throw InputError("BinaryMatrix::transpose_times: dimension mismatch");
    std::vector<double> out(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
        double s = 0.0;
        for_each_in_column(j, [&](std::size_t i) { s += q[i]; });
        out[j] = s;
    }
    return out;
}

std::vector<std::size_t> BinaryMatrix::row_counts() const {
    std::vector<std::size_t> rc(rows_, 0);
    for (std::size_t j = 0; j < cols_; ++j) for_each_in_column(j, [&](std::size_t i) { ++rc[i]; });
    return rc;
}

SignVector BinaryMatrix::column(std::size_t j) const {
    SignVector c(rows_);
    for_each_in_column(j, [&](std::size_t i) { c.set(i, true); });
    return c;
}

BinaryMatrix BinaryMatrix::select_columns(std::span<const std::size_t> cols) const {
    std::vector<SignVector> out;
    out.reserve(cols.size());
    for (std::size_t j : cols) {
        if (j >= cols_) throw InputError("BinaryMatrix::select_columns: index out of range");
        out.push_back(column(j));
    }
    return BinaryMatrix(rows_, out);
}

} // namespace npmle
