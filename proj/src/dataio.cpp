#include "frbm/dataio.hpp"

#include "frbm/errors.hpp"
#include "frbm/io.hpp"

namespace frbm {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803u;
constexpr std::uint32_t kLabelMagic = 0x00000801u;

std::uint32_t read_be_u32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                          const char* what) {
    if (bytes.size() < offset + 4) {
        throw ParseError(std::string("truncated input reading ") + what, offset);
    }
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

void put_be_u32(std::vector<std::uint8_t>& out, std::uint32_t x) {
    out.push_back(static_cast<std::uint8_t>(x >> 24));
    out.push_back(static_cast<std::uint8_t>(x >> 16));
    out.push_back(static_cast<std::uint8_t>(x >> 8));
    out.push_back(static_cast<std::uint8_t>(x));
}

}  // namespace

RawImageSet read_idx_images(const std::string& path) {
    const auto bytes = read_file(path);
    const std::uint32_t magic = read_be_u32(bytes, 0, "magic");
    if (magic != kImageMagic) {
        throw ParseError("bad magic for ubyte image file", 0);
    }
    RawImageSet images;
    images.count = static_cast<int>(read_be_u32(bytes, 4, "image count"));
    images.rows = static_cast<int>(read_be_u32(bytes, 8, "row count"));
    images.cols = static_cast<int>(read_be_u32(bytes, 12, "column count"));
    if (images.count < 0 || images.rows < 1 || images.cols < 1) {
        throw ParseError("implausible image dimensions", 4);
    }
    const std::uint64_t payload = static_cast<std::uint64_t>(images.count) *
                                  static_cast<std::uint64_t>(images.rows) *
                                  static_cast<std::uint64_t>(images.cols);
    if (bytes.size() < 16 + payload) {
        throw ParseError("truncated pixel payload", bytes.size());
    }
    if (bytes.size() > 16 + payload) {
        throw ParseError("trailing bytes after pixel payload", 16 + payload);
    }
    images.pixels.assign(bytes.begin() + 16, bytes.end());
    return images;
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
    const auto bytes = read_file(path);
    const std::uint32_t magic = read_be_u32(bytes, 0, "magic");
    if (magic != kLabelMagic) {
        throw ParseError("bad magic for ubyte label file", 0);
    }
    const std::uint32_t count = read_be_u32(bytes, 4, "label count");
    if (bytes.size() < 8 + static_cast<std::size_t>(count)) {
        throw ParseError("truncated label payload", bytes.size());
    }
    if (bytes.size() > 8 + static_cast<std::size_t>(count)) {
        throw ParseError("trailing bytes after label payload", 8 + static_cast<std::size_t>(count));
    }
    return {bytes.begin() + 8, bytes.end()};
}

void write_idx_images(const std::string& path, const RawImageSet& images) {
    const std::size_t payload = static_cast<std::size_t>(images.count) *
                                static_cast<std::size_t>(images.rows) *
                                static_cast<std::size_t>(images.cols);
    if (images.pixels.size() != payload) {
        throw std::invalid_argument("write_idx_images: pixel buffer does not match dimensions");
    }
    std::vector<std::uint8_t> out;
    out.reserve(16 + payload);
    put_be_u32(out, kImageMagic);
    put_be_u32(out, static_cast<std::uint32_t>(images.count));
    put_be_u32(out, static_cast<std::uint32_t>(images.rows));
    put_be_u32(out, static_cast<std::uint32_t>(images.cols));
    out.insert(out.end(), images.pixels.begin(), images.pixels.end());
    atomic_write(path, out);
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    put_be_u32(out, kLabelMagic);
    put_be_u32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    atomic_write(path, out);
}

BinaryDataset binarize(const RawImageSet& images, int threshold) {
    if (images.count < 1) throw std::invalid_argument("binarize: no images");
    if (threshold < 0 || threshold > 255) {
        throw std::invalid_argument("binarize: threshold must be in [0, 255]");
    }
    const int dim = images.rows * images.cols;
    const std::size_t expected = static_cast<std::size_t>(images.count) * static_cast<std::size_t>(dim);
    if (images.pixels.size() != expected) {
        throw DimensionError("binarize: pixel buffer does not match dimensions");
    }
    BinaryDataset data(dim);
    Bits row(static_cast<std::size_t>(dim));
    for (int n = 0; n < images.count; ++n) {
        const std::uint8_t* px = images.pixels.data() + static_cast<std::size_t>(n) * dim;
        for (int j = 0; j < dim; ++j) {
            row[static_cast<std::size_t>(j)] = px[j] > threshold ? 1 : 0;
        }
        data.append(row);
    }
    return data;
}

}  // namespace frbm
