#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tsrm {

/// Dense row-major 2-D array. Rows are periods, columns are prices
/// throughout the library.
template <typename T>
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T& at(std::size_t r, std::size_t c) {
        check(r, c);
        return data_[r * cols_ + c];
    }
    const T& at(std::size_t r, std::size_t c) const {
        check(r, c);
        return data_[r * cols_ + c];
    }

    const T* row_data(std::size_t r) const { return data_.data() + r * cols_; }
    std::vector<T>& raw() noexcept { return data_; }
    const std::vector<T>& raw() const noexcept { return data_; }

    bool operator==(const Grid2D&) const = default;

private:
    void check(std::size_t r, std::size_t c) const {
        if (r >= rows_ || c >= cols_) throw std::out_of_range("Grid2D index out of range");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// lambda(t, k): expected demand in period t (row t-1) at price k.
using MeanDemandMatrix = Grid2D<double>;

}  // namespace tsrm
