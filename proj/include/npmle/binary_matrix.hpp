#ifndef NPMLE_BINARY_MATRIX_HPP
#define NPMLE_BINARY_MATRIX_HPP

#include "npmle/sign_vector.hpp"

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace npmle {

// n x M 0/1 matrix stored by columns.  Columns are kept as row-index lists
// when the fill is at most 25% and as packed bit columns otherwise.
class BinaryMatrix {
public:
    enum class Storage { Sparse, Dense };

    BinaryMatrix() = default;
    // Each column is a bit pattern of length `rows` (set bit = 1).
    BinaryMatrix(std::size_t rows, const std::vector<SignVector>& columns);
    // Rejects entries other than 0 and 1.
    static BinaryMatrix from_dense(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Storage storage() const { return storage_; }
    std::size_t nonzeros() const { return nnz_; }

    std::size_t column_count(std::size_t j) const;
    bool get(std::size_t i, std::size_t j) const;

    template <class F>
    void for_each_in_column(std::size_t j, F&& f) const {
        if (storage_ == Storage::Sparse) {
            for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) f(static_cast<std::size_t>(row_idx_[k]));
        } else {
            const std::uint64_t* w = &bits_[j * words_per_col_];
            for (std::size_t k = 0; k < words_per_col_; ++k) {
                std::uint64_t b = w[k];
                while (b) {
                    f(64 * k + static_cast<std::size_t>(std::countr_zero(b)));
                    b &= b - 1;
                }
            }
        }
    }

    std::vector<double> times(std::span<const double> p) const;           // A p
    std::vector<double> transpose_times(std::span<const double> q) const; // A' q
    std::vector<std::size_t> row_counts() const;
    BinaryMatrix select_columns(std::span<const std::size_t> cols) const;
    SignVector column(std::size_t j) const;

private:
    std::size_t rows_ = 0, cols_ = 0, nnz_ = 0;
    Storage storage_ = Storage::Sparse;
    std::vector<std::size_t> col_ptr_{0};
    std::vector<std::uint32_t> row_idx_;
    std::size_t words_per_col_ = 0;
    std::vector<std::uint64_t> bits_;
};

} // namespace npmle

#endif
