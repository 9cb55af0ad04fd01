#include "frbm/io.hpp"

#include <bit>
#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "frbm/errors.hpp"

namespace frbm {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t x) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(x >> (8 * k)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t x) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(x >> (8 * k)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t x) {
    out.push_back(static_cast<std::uint8_t>(x));
    out.push_back(static_cast<std::uint8_t>(x >> 8));
}

void put_f64(std::vector<std::uint8_t>& out, double x) {
    put_u64(out, std::bit_cast<std::uint64_t>(x));
}

// Byte-buffer reader that reports the offset of whatever is malformed.
class Cursor {
public:
    explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t offset() const { return offset_; }

    void expect_magic(const char* magic) {
        if (bytes_.size() < 4 || std::memcmp(bytes_.data(), magic, 4) != 0) {
            throw ParseError(std::string("bad magic, expected '") + magic + "'", 0);
        }
        offset_ = 4;
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t x = 0;
        for (int k = 0; k < 4; ++k) x |= static_cast<std::uint32_t>(bytes_[offset_ + k]) << (8 * k);
        offset_ += 4;
        return x;
    }

    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t x = 0;
        for (int k = 0; k < 8; ++k) x |= static_cast<std::uint64_t>(bytes_[offset_ + k]) << (8 * k);
        offset_ += 8;
        return x;
    }

    std::uint16_t u16(const char* what) {
        need(2, what);
        auto x = static_cast<std::uint16_t>(bytes_[offset_] | (bytes_[offset_ + 1] << 8));
        offset_ += 2;
        return x;
    }

    std::uint8_t u8(const char* what) {
        need(1, what);
        return bytes_[offset_++];
    }

    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

    const std::uint8_t* raw(std::uint64_t count, const char* what) {
        need(count, what);
        const std::uint8_t* p = bytes_.data() + offset_;
        offset_ += count;
        return p;
    }

    void expect_end() {
        if (offset_ != bytes_.size()) {
            throw ParseError("trailing bytes after payload", offset_);
        }
    }

private:
    void need(std::uint64_t count, const char* what) {
        if (bytes_.size() - offset_ < count) {
            throw ParseError(std::string("truncated input reading ") + what, offset_);
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::uint64_t offset_ = 0;
};

constexpr std::uint32_t kFormatVersion = 1;

void check_version(std::uint32_t version, std::uint64_t offset) {
    if (version != kFormatVersion) {
        throw ParseError("unsupported format version " + std::to_string(version), offset - 4);
    }
}

std::string hex_double(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
}

double parse_hex_double(const std::string& token, int line) {
    const char* begin = token.c_str();
    char* end = nullptr;
    errno = 0;
    double x = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE) {
        throw ConfigError("bad float literal '" + token + "'", line);
    }
    return x;
}

}  // namespace

std::vector<std::uint8_t> serialize_frbm(const WeightAtomMix& mix) {
    std::vector<std::uint8_t> out;
    const auto dim = static_cast<std::uint32_t>(mix.visible_dim());
    out.reserve(24 + 8 * (dim + static_cast<std::size_t>(mix.atom_count()) * (dim + 1)));
    out.insert(out.end(), {'F', 'R', 'B', 'M'});
    put_u32(out, kFormatVersion);
    put_u32(out, dim);
    put_u32(out, static_cast<std::uint32_t>(mix.atom_count()));
    put_f64(out, mix.alpha());
    for (int j = 0; j < mix.visible_dim(); ++j) put_f64(out, mix.bias()[j]);
    for (const auto& atom : mix.atoms()) {
        put_f64(out, atom.mass);
        for (int j = 0; j < mix.visible_dim(); ++j) put_f64(out, atom.w[j]);
    }
    return out;
}

WeightAtomMix deserialize_frbm(std::span<const std::uint8_t> bytes) {
    Cursor cur(bytes);
    cur.expect_magic("FRBM");
    check_version(cur.u32("version"), cur.offset());
    const std::uint32_t dim = cur.u32("visible_dim");
    const std::uint32_t atoms = cur.u32("atom_count");
    if (dim == 0 || dim > (1u << 24)) throw ParseError("implausible visible_dim", cur.offset() - 8);
    if (atoms > (1u << 24)) throw ParseError("implausible atom_count", cur.offset() - 4);
    const double alpha = cur.f64("alpha");
    Vec bias(static_cast<Eigen::Index>(dim));
    for (std::uint32_t j = 0; j < dim; ++j) bias[static_cast<Eigen::Index>(j)] = cur.f64("bias");
    WeightAtomMix mix(static_cast<int>(dim), std::move(bias), alpha);
    for (std::uint32_t i = 0; i < atoms; ++i) {
        const double mass = cur.f64("atom mass");
        Vec w(static_cast<Eigen::Index>(dim));
        for (std::uint32_t j = 0; j < dim; ++j) w[static_cast<Eigen::Index>(j)] = cur.f64("atom weights");
        mix.add_atom(w, mass);
    }
    cur.expect_end();
    return mix;
}

void save_frbm(const std::string& path, const WeightAtomMix& mix) {
    const auto bytes = serialize_frbm(mix);
    atomic_write(path, bytes);
}

WeightAtomMix load_frbm(const std::string& path) {
    const auto bytes = read_file(path);
    return deserialize_frbm(bytes);
}

void save_frbm_text(const std::string& path, const WeightAtomMix& mix) {
    std::ostringstream out;
    out << "frbm-text " << kFormatVersion << "\n";
    out << "visible_dim " << mix.visible_dim() << "\n";
    out << "atom_count " << mix.atom_count() << "\n";
    out << "alpha " << hex_double(mix.alpha()) << "\n";
    out << "bias";
    for (int j = 0; j < mix.visible_dim(); ++j) out << ' ' << hex_double(mix.bias()[j]);
    out << "\n";
    for (const auto& atom : mix.atoms()) {
        out << "atom " << hex_double(atom.mass);
        for (int j = 0; j < mix.visible_dim(); ++j) out << ' ' << hex_double(atom.w[j]);
        out << "\n";
    }
    atomic_write_text(path, out.str());
}

WeightAtomMix load_frbm_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    int line_no = 0;
    auto next_tokens = [&](const std::string& expect_head) {
        if (!std::getline(in, line)) throw ConfigError("missing '" + expect_head + "' line", line_no);
        ++line_no;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head != expect_head) throw ConfigError("expected '" + expect_head + "', got '" + head + "'", line_no);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        return toks;
    };
    auto header = next_tokens("frbm-text");
    if (header.size() != 1 || header[0] != std::to_string(kFormatVersion)) {
        throw ConfigError("unsupported text model version", line_no);
    }
    auto dim_toks = next_tokens("visible_dim");
    auto atom_toks = next_tokens("atom_count");
    if (dim_toks.size() != 1 || atom_toks.size() != 1) throw ConfigError("malformed header", line_no);
    const int dim = std::stoi(dim_toks[0]);
    const int atoms = std::stoi(atom_toks[0]);
    auto alpha_toks = next_tokens("alpha");
    if (alpha_toks.size() != 1) throw ConfigError("malformed alpha line", line_no);
    const double alpha = parse_hex_double(alpha_toks[0], line_no);
    auto bias_toks = next_tokens("bias");
    if (static_cast<int>(bias_toks.size()) != dim) throw ConfigError("bias length mismatch", line_no);
    Vec bias(dim);
    for (int j = 0; j < dim; ++j) bias[j] = parse_hex_double(bias_toks[static_cast<std::size_t>(j)], line_no);
    WeightAtomMix mix(dim, std::move(bias), alpha);
    for (int i = 0; i < atoms; ++i) {
        auto toks = next_tokens("atom");
        if (static_cast<int>(toks.size()) != dim + 1) throw ConfigError("atom length mismatch", line_no);
        const double mass = parse_hex_double(toks[0], line_no);
        Vec w(dim);
        for (int j = 0; j < dim; ++j) w[j] = parse_hex_double(toks[static_cast<std::size_t>(j + 1)], line_no);
        mix.add_atom(w, mass);
    }
    return mix;
}

void save_fset(const std::string& path, const BinaryDataset& data) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'F', 'S', 'E', 'T'});
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    put_u32(out, static_cast<std::uint32_t>(data.dim()));
    out.push_back(data.has_labels() ? 1 : 0);
    const auto& bytes = data.vectors().bytes();
    out.insert(out.end(), bytes.begin(), bytes.end());
    if (data.has_labels()) {
        for (std::uint16_t label : data.labels()) put_u16(out, label);
    }
    atomic_write(path, out);
}

BinaryDataset load_fset(const std::string& path) {
    const auto bytes = read_file(path);
    Cursor cur(bytes);
    cur.expect_magic("FSET");
    check_version(cur.u32("version"), cur.offset());
    const std::uint32_t count = cur.u32("count");
    const std::uint32_t dim = cur.u32("dim");
    if (dim == 0 || dim > (1u << 24)) throw ParseError("implausible dim", cur.offset() - 4);
    const std::uint8_t has_labels = cur.u8("label flag");
    if (has_labels > 1) throw ParseError("label flag must be 0 or 1", cur.offset() - 1);
    PackedBitMatrix vectors(static_cast<int>(dim));
    const auto stride = static_cast<std::uint64_t>(vectors.stride());
    const std::uint8_t* rows = cur.raw(stride * count, "packed rows");
    for (std::uint32_t r = 0; r < count; ++r) vectors.append_packed(rows + r * stride);
    BinaryDataset data(std::move(vectors));
    if (has_labels) {
        std::vector<std::uint16_t> labels;
        labels.reserve(count);
        for (std::uint32_t r = 0; r < count; ++r) labels.push_back(cur.u16("labels"));
        data.set_labels(std::move(labels));
    }
    cur.expect_end();
    return data;
}

void save_fsmp(const std::string& path, const SampleBuffer& buffer) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'F', 'S', 'M', 'P'});
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(buffer.samples.rows()));
    put_u32(out, static_cast<std::uint32_t>(buffer.samples.dim()));
    put_u64(out, buffer.model_digest);
    const auto& bytes = buffer.samples.bytes();
    out.insert(out.end(), bytes.begin(), bytes.end());
    atomic_write(path, out);
}

SampleBuffer load_fsmp(const std::string& path) {
    const auto bytes = read_file(path);
    Cursor cur(bytes);
    cur.expect_magic("FSMP");
    check_version(cur.u32("version"), cur.offset());
    const std::uint32_t count = cur.u32("count");
    const std::uint32_t dim = cur.u32("dim");
    if (dim == 0 || dim > (1u << 24)) throw ParseError("implausible dim", cur.offset() - 4);
    SampleBuffer buffer;
    buffer.model_digest = cur.u64("model digest");
    buffer.samples = PackedBitMatrix(static_cast<int>(dim));
    const auto stride = static_cast<std::uint64_t>(buffer.samples.stride());
    const std::uint8_t* rows = cur.raw(stride * count, "packed rows");
    for (std::uint32_t r = 0; r < count; ++r) buffer.samples.append_packed(rows + r * stride);
    cur.expect_end();
    return buffer;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (std::uint8_t b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t model_digest(const WeightAtomMix& mix) { return fnv1a64(serialize_frbm(mix)); }

std::uint64_t model_digest(const RbmModel& model) { return model_digest(from_standard_rbm(model)); }

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error("read failed for " + path);
    return bytes;
}

void atomic_write(const std::string& path, std::span<const std::uint8_t> bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void atomic_write_text(const std::string& path, const std::string& text) {
    atomic_write(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string file_digest_hex(const std::string& path) {
    const auto bytes = read_file(path);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(bytes));
    return buf;
}

}  // namespace frbm
