#include "emdtex/io/bundle.hpp"

#include <bit>
#include <cstring>
#include <set>

#include "emdtex/digest.hpp"
#include "emdtex/error.hpp"
#include "emdtex/io/files.hpp"

namespace emdtex::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMetaName = "meta.json";

const std::set<std::string> kCoreKeys = {"schema_version", "kind", "height", "width", "channels",
                                         "files"};

// Stages files in a temp directory and renames it into place on commit.
class BundleWriter {
 public:
  BundleWriter(const fs::path& target, BundleKind kind, std::size_t h, std::size_t w,
               std::size_t c)
      : target_(target), staged_(temp_sibling(target)) {
    manifest_.kind = kind;
    manifest_.height = h;
    manifest_.width = w;
    manifest_.channels = c;
    std::error_code ec;
    fs::create_directories(staged_, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + staged_.string());
  }

  ~BundleWriter() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staged_, ec);
    }
  }

  BundleWriter(const BundleWriter&) = delete;
  BundleWriter& operator=(const BundleWriter&) = delete;

  void add(const std::string& name, std::span<const std::byte> bytes) {
    write_file_atomic(staged_ / name, bytes);
    manifest_.files.push_back({name, bytes.size(), sha256_hex(bytes)});
  }

  json& extra() { return manifest_.extra; }

  void commit() {
    json meta = manifest_.extra;
    meta["schema_version"] = manifest_.schema_version;
    meta["kind"] = std::string(to_string(manifest_.kind));
    meta["height"] = manifest_.height;
    meta["width"] = manifest_.width;
    meta["channels"] = manifest_.channels;
    json files = json::array();
    for (const auto& f : manifest_.files) {
      files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
    }
    meta["files"] = files;
    write_file_atomic(staged_ / kMetaName, meta.dump(2) + "\n");
    commit_directory(staged_, target_);
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path staged_;
  BundleManifest manifest_;
  bool committed_ = false;
};

std::vector<std::byte> read_listed(const fs::path& dir, const BundleManifest& m,
                                   const std::string& name, std::size_t expected_bytes) {
  const auto it = std::find_if(m.files.begin(), m.files.end(),
                               [&](const FileEntry& f) { return f.name == name; });
  if (it == m.files.end()) throw Error(ErrorCode::kFormat, "bundle does not list " + name);
  auto bytes = read_file(dir / name);
  if (bytes.size() != it->bytes || bytes.size() != expected_bytes) {
    throw Error(ErrorCode::kFormat, name + ": expected " + std::to_string(expected_bytes) +
                                        " bytes, found " + std::to_string(bytes.size()));
  }
  if (sha256_hex(bytes) != it->sha256) throw Error(ErrorCode::kFormat, name + ": digest mismatch");
  return bytes;
}

ScalarField read_plane(const fs::path& dir, const BundleManifest& m, const std::string& name) {
  const auto bytes = read_listed(dir, m, name, m.height * m.width * 4);
  return decode_f32(bytes, m.height, m.width);
}

BundleManifest expect_kind(const fs::path& dir, BundleKind kind) {
  BundleManifest m = read_manifest(dir);
  if (m.kind != kind) {
    throw Error(ErrorCode::kFormat, dir.string() + " is a " + std::string(to_string(m.kind)) +
                                        " bundle, expected " + std::string(to_string(kind)));
  }
  return m;
}

template <typename T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::kFormat, std::string("meta.json lacks '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("meta.json '") + key + "': " + e.what());
  }
}

json config_to_json(const bemd::BemdConfig& cfg) {
  json j;
  j["n_bimfs"] = cfg.n_bimfs;
  j["window_rule"] = std::string(bemd::to_string(cfg.window_rule));
  j["smoothing"] = cfg.smoothing;
  j["connectivity"] = cfg.connectivity == bemd::Connectivity::kEight ? "eight" : "four";
  j["fixed_window"] = cfg.fixed_window ? json(*cfg.fixed_window) : json(nullptr);
  return j;
}

bemd::BemdConfig config_from_json(const json& j) {
  bemd::BemdConfig cfg;
  cfg.n_bimfs = get<std::size_t>(j, "n_bimfs");
  cfg.window_rule = bemd::window_rule_from_string(get<std::string>(j, "window_rule"));
  cfg.smoothing = get<bool>(j, "smoothing");
  const auto conn = get<std::string>(j, "connectivity");
  if (conn != "eight" && conn != "four") throw Error(ErrorCode::kFormat, "bad connectivity");
  cfg.connectivity = conn == "eight" ? bemd::Connectivity::kEight : bemd::Connectivity::kFour;
  if (j.contains("fixed_window") && !j.at("fixed_window").is_null()) {
    cfg.fixed_window = get<int>(j, "fixed_window");
  }
  return cfg;
}

}  // namespace

std::string_view to_string(BundleKind kind) {
  switch (kind) {
    case BundleKind::kDecomposition: return "decomposition";
    case BundleKind::kPositionMap: return "position_map";
    case BundleKind::kSpectrum: return "spectrum";
    case BundleKind::kPlanes: return "planes";
  }
  return "planes";
}

BundleKind bundle_kind_from_string(std::string_view name) {
  if (name == "decomposition") return BundleKind::kDecomposition;
  if (name == "position_map") return BundleKind::kPositionMap;
  if (name == "spectrum") return BundleKind::kSpectrum;
  if (name == "planes") return BundleKind::kPlanes;
  throw Error(ErrorCode::kFormat, "unknown bundle kind '" + std::string(name) + "'");
}

bool is_bundle(const fs::path& path) {
  std::error_code ec;
  return fs::is_directory(path, ec) && fs::is_regular_file(path / kMetaName, ec);
}

BundleManifest read_manifest(const fs::path& dir) {
  if (!is_bundle(dir)) throw Error(ErrorCode::kIo, dir.string() + " is not a bundle directory");
  const auto bytes = read_file(dir / kMetaName);
  json meta;
  try {
    meta = json::parse(reinterpret_cast<const char*>(bytes.data()),
                       reinterpret_cast<const char*>(bytes.data()) + bytes.size());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, "meta.json: " + std::string(e.what()));
  }
  BundleManifest m;
  m.schema_version = get<int>(meta, "schema_version");
  if (m.schema_version != kSchemaVersion) {
    throw Error(ErrorCode::kFormat, "unsupported schema_version " + std::to_string(m.schema_version));
  }
  m.kind = bundle_kind_from_string(get<std::string>(meta, "kind"));
  m.height = get<std::size_t>(meta, "height");
  m.width = get<std::size_t>(meta, "width");
  m.channels = get<std::size_t>(meta, "channels");
  for (const auto& f : get<json>(meta, "files")) {
    m.files.push_back({get<std::string>(f, "name"), get<std::uint64_t>(f, "bytes"),
                       get<std::string>(f, "sha256")});
  }
  for (const auto& [key, value] : meta.items()) {
    if (!kCoreKeys.contains(key)) m.extra[key] = value;
  }
  return m;
}

std::vector<std::string> verify_bundle(const fs::path& dir) {
  std::vector<std::string> problems;
  BundleManifest m;
  try {
    m = read_manifest(dir);
  } catch (const Error& e) {
    problems.emplace_back(e.what());
    return problems;
  }
  const std::size_t plane = m.height * m.width;
  for (const auto& f : m.files) {
    std::error_code ec;
    if (!fs::is_regular_file(dir / f.name, ec)) {
      problems.push_back(f.name + ": missing");
      continue;
    }
    const auto bytes = read_file(dir / f.name);
    const bool is_mask = f.name.ends_with(".u8");
    const std::size_t expected = is_mask ? plane : plane * 4;
    if (bytes.size() != f.bytes || bytes.size() != expected) {
      problems.push_back(f.name + ": " + std::to_string(bytes.size()) + " bytes, expected " +
                         std::to_string(expected));
    }
    if (sha256_hex(bytes) != f.sha256) problems.push_back(f.name + ": digest mismatch");
  }
  return problems;
}

std::vector<std::byte> encode_f32(const ScalarField& plane) {
  std::vector<std::byte> out;
  out.reserve(plane.size() * 4);
  for (double v : plane.values()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::byte>((bits >> (8 * b)) & 0xFF));
  }
  return out;
}

ScalarField decode_f32(std::span<const std::byte> bytes, std::size_t height, std::size_t width) {
  if (bytes.size() != height * width * 4) {
    throw Error(ErrorCode::kFormat, "f32 plane has " + std::to_string(bytes.size()) +
                                        " bytes, expected " + std::to_string(height * width * 4));
  }
  ScalarField out(height, width);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(std::to_integer<unsigned>(bytes[i * 4 + b])) << (8 * b);
    }
    out.values()[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return out;
}

MultiChannelField DecompositionBundle::sigma_c() const {
  MultiChannelField out(height, width, channels.size(), ValueRange::kUnbounded);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    auto dst = out.channel(c).values();
    for (const auto& bimf : channels[c].bimfs) {
      const auto src = bimf.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
  return out;
}

MultiChannelField DecompositionBundle::residue() const {
  std::vector<ScalarField> planes;
  for (const auto& ch : channels) planes.push_back(ch.residue);
  return MultiChannelField(std::move(planes), ValueRange::kUnbounded);
}

bemd::Normalization DecompositionBundle::normalization() const {
  return channels.empty() ? bemd::Normalization::kNone : channels.front().meta.normalization;
}

void write_decomposition_bundle(const fs::path& dir, const DecompositionBundle& b) {
  BundleWriter w(dir, BundleKind::kDecomposition, b.height, b.width, b.channels.size());
  json n_bimfs = json::array();
  json windows = json::array();
  json stopped = json::array();
  json hashes = json::array();
  for (std::size_t c = 0; c < b.channels.size(); ++c) {
    const auto& d = b.channels[c];
    if (d.residue.height() != b.height || d.residue.width() != b.width) {
      throw Error(ErrorCode::kShapeMismatch, "channel shape differs from bundle shape");
    }
    for (std::size_t k = 0; k < d.bimfs.size(); ++k) {
      w.add("bimf_" + std::to_string(k + 1) + "_" + std::to_string(c) + ".f32",
            encode_f32(d.bimfs[k]));
    }
    w.add("residue_" + std::to_string(c) + ".f32", encode_f32(d.residue));
    n_bimfs.push_back(d.bimfs.size());
    windows.push_back(d.meta.window_sizes);
    stopped.push_back(d.meta.stopped_early);
    hashes.push_back(d.meta.source_hash);
  }
  auto& x = w.extra();
  x["n_bimfs_requested"] = b.config.n_bimfs;
  x["n_bimfs"] = n_bimfs;
  x["window_sizes"] = windows;
  x["stopped_early"] = stopped;
  x["channel_hashes"] = hashes;
  x["normalization"] = std::string(bemd::to_string(b.normalization()));
  x["source_hash"] = b.source_hash;
  x["config"] = config_to_json(b.config);
  w.commit();
}

DecompositionBundle read_decomposition_bundle(const fs::path& dir) {
  const BundleManifest m = expect_kind(dir, BundleKind::kDecomposition);
  const json& x = m.extra;
  DecompositionBundle b;
  b.height = m.height;
  b.width = m.width;
  b.config = config_from_json(get<json>(x, "config"));
  b.source_hash = get<std::string>(x, "source_hash");
  const auto normalization = bemd::normalization_from_string(get<std::string>(x, "normalization"));
  const auto n_bimfs = get<std::vector<std::size_t>>(x, "n_bimfs");
  const auto windows = get<std::vector<std::vector<int>>>(x, "window_sizes");
  const auto stopped = get<std::vector<bool>>(x, "stopped_early");
  const auto hashes = get<std::vector<std::string>>(x, "channel_hashes");
  if (n_bimfs.size() != m.channels || windows.size() != m.channels ||
      stopped.size() != m.channels || hashes.size() != m.channels) {
    throw Error(ErrorCode::kFormat, "per-channel metadata does not match channel count");
  }
  for (std::size_t c = 0; c < m.channels; ++c) {
    bemd::Decomposition2D d;
    for (std::size_t k = 0; k < n_bimfs[c]; ++k) {
      d.bimfs.push_back(
          read_plane(dir, m, "bimf_" + std::to_string(k + 1) + "_" + std::to_string(c) + ".f32"));
    }
    d.residue = read_plane(dir, m, "residue_" + std::to_string(c) + ".f32");
    d.meta.n_bimfs_requested = get<std::size_t>(x, "n_bimfs_requested");
    d.meta.window_sizes = windows[c];
    d.meta.normalization = normalization;
    d.meta.source_hash = hashes[c];
    d.meta.stopped_early = stopped[c];
    b.channels.push_back(std::move(d));
  }
  return b;
}

void write_position_bundle(const fs::path& dir, const PositionMapBundle& b) {
  const auto& p = b.map;
  if (!p.y.same_shape(p.x) || !p.z.same_shape(p.x) || p.mask.values.size() != p.x.size()) {
    throw Error(ErrorCode::kShapeMismatch, "position planes and mask differ in shape");
  }
  BundleWriter w(dir, BundleKind::kPositionMap, p.height(), p.width(), 3);
  w.add("position_x.f32", encode_f32(p.x));
  w.add("position_y.f32", encode_f32(p.y));
  w.add("position_z.f32", encode_f32(p.z));
  w.add("mask.u8", std::as_bytes(std::span(p.mask.values)));
  w.extra()["source_height"] = b.source.height;
  w.extra()["source_width"] = b.source.width;
  w.commit();
}

PositionMapBundle read_position_bundle(const fs::path& dir) {
  const BundleManifest m = expect_kind(dir, BundleKind::kPositionMap);
  PositionMapBundle b;
  b.map.x = read_plane(dir, m, "position_x.f32");
  b.map.y = read_plane(dir, m, "position_y.f32");
  b.map.z = read_plane(dir, m, "position_z.f32");
  const auto mask = read_listed(dir, m, "mask.u8", m.height * m.width);
  b.map.mask.height = m.height;
  b.map.mask.width = m.width;
  b.map.mask.values.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    b.map.mask.values[i] = std::to_integer<unsigned char>(mask[i]) != 0 ? 1 : 0;
  }
  b.source.height = get<std::size_t>(m.extra, "source_height");
  b.source.width = get<std::size_t>(m.extra, "source_width");
  return b;
}

void write_planes_bundle(const fs::path& dir, const MultiChannelField& field) {
  BundleWriter w(dir, BundleKind::kPlanes, field.height(), field.width(), field.num_channels());
  for (std::size_t c = 0; c < field.num_channels(); ++c) {
    w.add("plane_" + std::to_string(c) + ".f32", encode_f32(field.channel(c)));
  }
  w.extra()["range"] = std::string(to_string(field.range()));
  w.commit();
}

MultiChannelField read_planes_bundle(const fs::path& dir) {
  const BundleManifest m = expect_kind(dir, BundleKind::kPlanes);
  std::vector<ScalarField> planes;
  for (std::size_t c = 0; c < m.channels; ++c) {
    planes.push_back(read_plane(dir, m, "plane_" + std::to_string(c) + ".f32"));
  }
  return MultiChannelField(std::move(planes),
                           value_range_from_string(get<std::string>(m.extra, "range")));
}

void write_spectrum_bundle(const fs::path& dir, const spectral::SpectrumStats& s) {
  BundleWriter w(dir, BundleKind::kSpectrum, s.height, s.width, 1);
  ScalarField re(s.height, s.width);
  ScalarField im(s.height, s.width);
  for (std::size_t i = 0; i < s.mean_spectrum.size(); ++i) {
    re.values()[i] = s.mean_spectrum[i].real();
    im.values()[i] = s.mean_spectrum[i].imag();
  }
  w.add("magnitude.f32", encode_f32(s.magnitude));
  w.add("mean_real.f32", encode_f32(re));
  w.add("mean_imag.f32", encode_f32(im));
  w.extra()["n_images"] = s.n_images;
  w.commit();
}

spectral::SpectrumStats read_spectrum_bundle(const fs::path& dir) {
  const BundleManifest m = expect_kind(dir, BundleKind::kSpectrum);
  spectral::SpectrumStats s;
  s.height = m.height;
  s.width = m.width;
  s.n_images = get<std::size_t>(m.extra, "n_images");
  s.magnitude = read_plane(dir, m, "magnitude.f32");
  const ScalarField re = read_plane(dir, m, "mean_real.f32");
  const ScalarField im = read_plane(dir, m, "mean_imag.f32");
  s.mean_spectrum.resize(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) s.mean_spectrum[i] = {re.values()[i], im.values()[i]};
  return s;
}

}  // namespace emdtex::io
