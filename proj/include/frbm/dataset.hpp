#pragma once

#include <cstdint>
#include <vector>

#include "frbm/model.hpp"

namespace frbm {

/// Row-major bit matrix, each row padded to a whole byte. Bit j of a row
/// lives in byte j/8 at bit position j%8.
class PackedBitMatrix {
public:
    PackedBitMatrix() = default;
    explicit PackedBitMatrix(int dim);

    int dim() const { return dim_; }
    std::int64_t rows() const { return rows_; }
    std::int64_t stride() const { return stride_; }

    int get(std::int64_t r, int j) const {
        const std::uint8_t byte = bytes_[static_cast<std::size_t>(r * stride_ + j / 8)];
        return (byte >> (j % 8)) & 1;
    }

    /// Appends one row given as dim entries; any nonzero byte counts as 1.
    void append_bits(const std::uint8_t* bits);
    void append_bits(const Bits& bits);

    /// Appends one already-packed row of stride() bytes.
    void append_packed(const std::uint8_t* packed);

    Bits row_bits(std::int64_t r) const;

    /// w·row(r) accumulated over set bits in ascending index order.
    double dot(std::int64_t r, const Vec& w) const;

    /// Column means over all rows; rows() must be positive.
    Vec mean() const;

    PackedBitMatrix select(const std::vector<std::int64_t>& idx) const;

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    void reserve_rows(std::int64_t n);

    bool operator==(const PackedBitMatrix& o) const = default;

private:
    int dim_ = 0;
    std::int64_t stride_ = 0;
    std::int64_t rows_ = 0;
    std::vector<std::uint8_t> bytes_;
};

/// Binary vectors with optional small-integer labels.
class BinaryDataset {
public:
    BinaryDataset() = default;
    explicit BinaryDataset(int dim) : vectors_(dim) {}
    explicit BinaryDataset(PackedBitMatrix vectors) : vectors_(std::move(vectors)) {}

    int dim() const { return vectors_.dim(); }
    std::int64_t size() const { return vectors_.rows(); }

    const PackedBitMatrix& vectors() const { return vectors_; }
    PackedBitMatrix& vectors() { return vectors_; }

    bool has_labels() const { return !labels_.empty(); }
    const std::vector<std::uint16_t>& labels() const { return labels_; }
    void set_labels(std::vector<std::uint16_t> labels);

    void append(const Bits& v);
    void append(const Bits& v, std::uint16_t label);

    Vec mean() const { return vectors_.mean(); }

    BinaryDataset subset(const std::vector<std::int64_t>& idx) const;

private:
    PackedBitMatrix vectors_;
    std::vector<std::uint16_t> labels_;
};

/// Splits off `validation_count` rows chosen by a seeded Fisher-Yates shuffle.
/// The remaining rows form the train half; labels travel with their rows. The
/// same seed always produces the same permutation.
struct SplitResult {
    BinaryDataset train;
    BinaryDataset validation;
};
SplitResult split(const BinaryDataset& data, std::int64_t validation_count, std::uint64_t seed);

}  // namespace frbm
