#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frbm/dataset.hpp"

namespace frbm {

/// Grayscale images as read from an IDX file, row-major within each image.
struct RawImageSet {
    int count = 0;
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> pixels;  // count * rows * cols bytes
};

/// Readers for the big-endian IDX container (magic 0x00000803 for ubyte
/// images, 0x00000801 for ubyte labels). Truncation, a wrong magic, or bytes
/// past the declared payload raise ParseError naming the offending offset.
RawImageSet read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);

void write_idx_images(const std::string& path, const RawImageSet& images);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

/// Thresholds pixels into bits: on exactly when pixel > threshold. Each image
/// flattens to one row of rows*cols units.
BinaryDataset binarize(const RawImageSet& images, int threshold);

}  // namespace frbm
