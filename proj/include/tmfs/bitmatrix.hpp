#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tmfs {

// Row-major bit matrix packed into 64-bit words. Each row occupies
// words_per_row() words; bits past the last column of a row are always
// zero, which lets clause evaluation run on whole words without masking.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), words_(rows * wpr_, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t words_per_row() const { return wpr_; }

    bool get(std::size_t r, std::size_t c) const {
        return (words_[r * wpr_ + c / 64] >> (c % 64)) & 1ULL;
    }
    void set(std::size_t r, std::size_t c, bool v) {
        std::uint64_t& w = words_[r * wpr_ + c / 64];
        std::uint64_t bit = 1ULL << (c % 64);
        if (v)
            w |= bit;
        else
            w &= ~bit;
    }

    std::span<const std::uint64_t> row(std::size_t r) const {
        return {words_.data() + r * wpr_, wpr_};
    }
    std::span<std::uint64_t> row(std::size_t r) {
        return {words_.data() + r * wpr_, wpr_};
    }

    bool operator==(const BitMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t wpr_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace tmfs
