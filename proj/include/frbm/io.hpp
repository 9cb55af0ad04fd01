#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "frbm/dataset.hpp"
#include "frbm/model.hpp"
#include "frbm/sampling.hpp"

namespace frbm {

/// All binary formats are little-endian with a 4-byte magic and u32 version.
///
///   FRBM: "FRBM" | version | u32 dim | u32 atoms | f64 alpha | f64 bias[dim]
///         | atoms x (f64 mass | f64 w[dim])
///   FSET: "FSET" | version | u32 count | u32 dim | u8 has_labels
///         | count x packed row | u16 labels[count] if labeled
///   FSMP: "FSMP" | version | u32 count | u32 dim | u64 model digest
///         | count x packed row
///
/// Packed rows put bit j at byte j/8, bit position j%8, rows padded to whole
/// bytes. Writers go through a temp file plus rename, so a crashed run never
/// leaves a half-written artifact behind.

std::vector<std::uint8_t> serialize_frbm(const WeightAtomMix& mix);
WeightAtomMix deserialize_frbm(std::span<const std::uint8_t> bytes);

void save_frbm(const std::string& path, const WeightAtomMix& mix);
WeightAtomMix load_frbm(const std::string& path);

/// Text twin of FRBM using hex float literals, so values survive a
/// write/read round trip bit-for-bit while staying diffable.
void save_frbm_text(const std::string& path, const WeightAtomMix& mix);
WeightAtomMix load_frbm_text(const std::string& path);

void save_fset(const std::string& path, const BinaryDataset& data);
BinaryDataset load_fset(const std::string& path);

void save_fsmp(const std::string& path, const SampleBuffer& buffer);
SampleBuffer load_fsmp(const std::string& path);

/// FNV-1a over a byte range.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

/// Digest of the serialized model; equal models always agree, and a dense
/// machine digests identically to its unit-mass mix.
std::uint64_t model_digest(const WeightAtomMix& mix);
std::uint64_t model_digest(const RbmModel& model);

std::vector<std::uint8_t> read_file(const std::string& path);
void atomic_write(const std::string& path, std::span<const std::uint8_t> bytes);
void atomic_write_text(const std::string& path, const std::string& text);
std::string file_digest_hex(const std::string& path);

}  // namespace frbm
