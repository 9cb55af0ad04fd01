#include "frbm/dataset.hpp"

#include <numeric>

#include "frbm/errors.hpp"
#include "frbm/rng.hpp"

namespace frbm {

PackedBitMatrix::PackedBitMatrix(int dim) : dim_(dim), stride_((dim + 7) / 8) {
    if (dim < 1) throw DimensionError("PackedBitMatrix: dim must be positive");
}

void PackedBitMatrix::append_bits(const std::uint8_t* bits) {
    bytes_.resize(bytes_.size() + static_cast<std::size_t>(stride_), 0);
    std::uint8_t* row = bytes_.data() + static_cast<std::size_t>(rows_ * stride_);
    for (int j = 0; j < dim_; ++j) {
        if (bits[j]) row[j / 8] |= static_cast<std::uint8_t>(1u << (j % 8));
    }
    ++rows_;
}

void PackedBitMatrix::append_bits(const Bits& bits) {
    if (static_cast<int>(bits.size()) != dim_) {
        throw DimensionError("PackedBitMatrix: row has wrong length");
    }
    append_bits(bits.data());
}

void PackedBitMatrix::append_packed(const std::uint8_t* packed) {
    bytes_.insert(bytes_.end(), packed, packed + stride_);
    ++rows_;
}

Bits PackedBitMatrix::row_bits(std::int64_t r) const {
    Bits out(static_cast<std::size_t>(dim_));
    for (int j = 0; j < dim_; ++j) out[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(get(r, j));
    return out;
}

double PackedBitMatrix::dot(std::int64_t r, const Vec& w) const {
    if (w.size() != dim_) throw DimensionError("PackedBitMatrix::dot: weight length mismatch");
    const std::uint8_t* row = bytes_.data() + static_cast<std::size_t>(r * stride_);
    double s = 0.0;
    for (int base = 0; base < dim_; base += 8) {
        std::uint8_t byte = row[base / 8];
        if (byte == 0) continue;
        int top = dim_ - base < 8 ? dim_ - base : 8;
        for (int k = 0; k < top; ++k) {
            if (byte & (1u << k)) s += w[base + k];
        }
    }
    return s;
}

Vec PackedBitMatrix::mean() const {
    if (rows_ == 0) throw std::invalid_argument("PackedBitMatrix::mean: no rows");
    Vec m = Vec::Zero(dim_);
    for (std::int64_t r = 0; r < rows_; ++r) {
        const std::uint8_t* row = bytes_.data() + static_cast<std::size_t>(r * stride_);
        for (int j = 0; j < dim_; ++j) {
            if (row[j / 8] & (1u << (j % 8))) m[j] += 1.0;
        }
    }
    return m / static_cast<double>(rows_);
}

PackedBitMatrix PackedBitMatrix::select(const std::vector<std::int64_t>& idx) const {
    PackedBitMatrix out(dim_);
    out.reserve_rows(static_cast<std::int64_t>(idx.size()));
    for (std::int64_t r : idx) {
        if (r < 0 || r >= rows_) throw std::out_of_range("PackedBitMatrix::select: row out of range");
        out.append_packed(bytes_.data() + static_cast<std::size_t>(r * stride_));
    }
    return out;
}

void PackedBitMatrix::reserve_rows(std::int64_t n) {
    bytes_.reserve(static_cast<std::size_t>(n * stride_));
}

void BinaryDataset::set_labels(std::vector<std::uint16_t> labels) {
    if (static_cast<std::int64_t>(labels.size()) != size()) {
        throw DimensionError("BinaryDataset: label count must match row count");
    }
    labels_ = std::move(labels);
}

void BinaryDataset::append(const Bits& v) {
    if (has_labels()) throw std::invalid_argument("BinaryDataset: labeled dataset needs a label per row");
    vectors_.append_bits(v);
}

void BinaryDataset::append(const Bits& v, std::uint16_t label) {
    if (size() > 0 && !has_labels()) {
        throw std::invalid_argument("BinaryDataset: unlabeled dataset cannot take labels");
    }
    vectors_.append_bits(v);
    labels_.push_back(label);
}

BinaryDataset BinaryDataset::subset(const std::vector<std::int64_t>& idx) const {
    BinaryDataset out(vectors_.select(idx));
    if (has_labels()) {
        std::vector<std::uint16_t> l;
        l.reserve(idx.size());
        for (std::int64_t r : idx) l.push_back(labels_[static_cast<std::size_t>(r)]);
        out.set_labels(std::move(l));
    }
    return out;
}

SplitResult split(const BinaryDataset& data, std::int64_t validation_count, std::uint64_t seed) {
    const std::int64_t n = data.size();
    if (validation_count < 0 || validation_count >= n) {
        throw std::invalid_argument("split: validation_count must be in [0, size)");
    }
    std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    RngStream rng(seed, kStreamSplitBase, 0);
    for (std::int64_t i = n - 1; i > 0; --i) {
        auto j = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    std::vector<std::int64_t> train_idx(perm.begin(), perm.end() - validation_count);
    std::vector<std::int64_t> valid_idx(perm.end() - validation_count, perm.end());
    SplitResult out{data.subset(train_idx), data.subset(valid_idx)};
    return out;
}

}  // namespace frbm
