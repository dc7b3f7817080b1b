#pragma once

#include <cstdint>
#include <vector>

namespace splitfit {

/// Dense boolean adjacency matrix.
class BoolMatrix {
  public:
    BoolMatrix() = default;
    BoolMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols, 0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    bool at(int i, int j) const { return data_[std::size_t(i) * cols_ + j]; }
    void set(int i, int j, bool v = true) {
        data_[std::size_t(i) * cols_ + j] = v ? 1 : 0;
    }
    void set_sym(int i, int j, bool v = true) {
        set(i, j, v);
        set(j, i, v);
    }

    bool symmetric_zero_diagonal() const {
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i) {
            if (at(i, i)) return false;
            for (int j = i + 1; j < cols_; ++j)
                if (at(i, j) != at(j, i)) return false;
        }
        return true;
    }

    int row_degree(int i) const {
        int n = 0;
        for (int j = 0; j < cols_; ++j) n += at(i, j);
        return n;
    }

    friend bool operator==(const BoolMatrix&, const BoolMatrix&) = default;

  private:
    int rows_ = 0, cols_ = 0;
    std::vector<std::uint8_t> data_;
};

}  // namespace splitfit
