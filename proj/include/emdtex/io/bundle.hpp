#pragma once

// On-disk bundles: a directory holding meta.json plus planar raw files.
// f32 planes are little-endian IEEE-754 binary32, row-major, H*W*4 bytes;
// mask.u8 is one byte (0/1) per texel. meta.json lists every file with its
// byte length and SHA-256.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "emdtex/bemd.hpp"
#include "emdtex/field.hpp"
#include "emdtex/spectral.hpp"
#include "emdtex/texture_uv.hpp"

namespace emdtex::io {

inline constexpr int kSchemaVersion = 1;

enum class BundleKind { kDecomposition, kPositionMap, kSpectrum, kPlanes };

std::string_view to_string(BundleKind kind);
BundleKind bundle_kind_from_string(std::string_view name);

struct FileEntry {
  std::string name;
  std::uint64_t bytes = 0;
  std::string sha256;
};

struct BundleManifest {
  int schema_version = kSchemaVersion;
  BundleKind kind = BundleKind::kPlanes;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<FileEntry> files;
  nlohmann::json extra;  // kind-specific fields, including the config echo
};

// Parses meta.json only. Throws kIo / kFormat.
BundleManifest read_manifest(const std::filesystem::path& dir);

// Lists every listed file that is missing, has the wrong length or digest.
std::vector<std::string> verify_bundle(const std::filesystem::path& dir);

bool is_bundle(const std::filesystem::path& path);

std::vector<std::byte> encode_f32(const ScalarField& plane);
ScalarField decode_f32(std::span<const std::byte> bytes, std::size_t height, std::size_t width);

struct DecompositionBundle {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<bemd::Decomposition2D> channels;
  bemd::BemdConfig config;
  std::string source_hash;  // digest of the source file contents

  MultiChannelField sigma_c() const;
  MultiChannelField residue() const;
  bemd::Normalization normalization() const;
};

// Files: bimf_<k>_<c>.f32 (k from 1, channel c from 0) and residue_<c>.f32.
void write_decomposition_bundle(const std::filesystem::path& dir, const DecompositionBundle& b);
DecompositionBundle read_decomposition_bundle(const std::filesystem::path& dir);

struct PositionMapBundle {
  uv::UVPositionMap map;
  uv::ImageDims source;
};

// Files: position_x.f32, position_y.f32, position_z.f32, mask.u8.
void write_position_bundle(const std::filesystem::path& dir, const PositionMapBundle& b);
PositionMapBundle read_position_bundle(const std::filesystem::path& dir);

// Files: plane_<c>.f32; meta records the declared value range.
void write_planes_bundle(const std::filesystem::path& dir, const MultiChannelField& field);
MultiChannelField read_planes_bundle(const std::filesystem::path& dir);

// Files: magnitude.f32, mean_real.f32, mean_imag.f32.
void write_spectrum_bundle(const std::filesystem::path& dir, const spectral::SpectrumStats& s);
spectral::SpectrumStats read_spectrum_bundle(const std::filesystem::path& dir);

}  // namespace emdtex::io
