#include "emdtex/cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "emdtex/bemd.hpp"
#include "emdtex/cli/config.hpp"
#include "emdtex/digest.hpp"
#include "emdtex/error.hpp"
#include "emdtex/io/bundle.hpp"
#include "emdtex/io/files.hpp"
#include "emdtex/io/png.hpp"
#include "emdtex/losses.hpp"
#include "emdtex/parallel.hpp"
#include "emdtex/signal_emd.hpp"
#include "emdtex/spectral.hpp"
#include "emdtex/texture_uv.hpp"

namespace emdtex::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kFormat:
    case ErrorCode::kEmptySet:
      return kExitIo;
    default:
      return kExitInvalid;
  }
}

std::string file_digest(const fs::path& path) {
  return "sha256:" + sha256_hex(io::read_file(path));
}

std::size_t strict_extrema_count(const ScalarField& f) {
  if (f.height() < 3 || f.width() < 3) return 0;
  const auto masks = bemd::local_extrema(f);
  return masks.maxima.count() + masks.minima.count();
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < items.size(); ++i) os << (i ? ", " : "") << items[i];
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------- decompose

struct DecomposeArgs {
  std::string input;
  std::string output;
  std::optional<std::size_t> n_bimfs;
  std::optional<std::string> window_rule;
  bool no_smoothing = false;
  std::optional<int> fixed_window;
  std::string connectivity = "eight";
  bool no_normalize = false;
};

int cmd_decompose(const DecomposeArgs& a, CliConfig cfg, std::ostream& out, std::ostream& err) {
  if (a.n_bimfs) cfg.n_bimfs = *a.n_bimfs;
  if (a.window_rule) cfg.window_rule = bemd::window_rule_from_string(*a.window_rule);
  if (a.no_smoothing) cfg.smoothing = false;
  cfg.validate();

  bemd::BemdConfig bcfg;
  bcfg.n_bimfs = cfg.n_bimfs;
  bcfg.window_rule = cfg.window_rule;
  bcfg.smoothing = cfg.smoothing;
  bcfg.fixed_window = a.fixed_window;
  bcfg.connectivity =
      a.connectivity == "four" ? bemd::Connectivity::kFour : bemd::Connectivity::kEight;
  bcfg.validate();

  MultiChannelField field;
  std::string source_hash;
  if (io::is_bundle(a.input)) {
    field = io::read_planes_bundle(a.input);
    source_hash = file_digest(fs::path(a.input) / "meta.json");
  } else {
    field = io::read_png(a.input);
    source_hash = file_digest(a.input);
  }

  io::DecompositionBundle bundle;
  bundle.height = field.height();
  bundle.width = field.width();
  bundle.config = bcfg;
  bundle.source_hash = source_hash;
  if (field.range() == ValueRange::kUnit && !a.no_normalize) {
    bundle.channels = bemd::decompose_texture(field, bcfg, cfg.jobs).channels;
  } else {
    bundle.channels.resize(field.num_channels());
    parallel_for(field.num_channels(), cfg.jobs, [&](std::size_t c) {
      bundle.channels[c] = bemd::decompose(field.channel(c), bcfg);
    });
  }
  io::write_decomposition_bundle(a.output, bundle);

  out << "decomposed " << a.input << " (" << field.height() << "x" << field.width() << "x"
      << field.num_channels() << ", normalization "
      << bemd::to_string(bundle.normalization()) << ") -> " << a.output << "\n";
  for (std::size_t c = 0; c < bundle.channels.size(); ++c) {
    const auto& d = bundle.channels[c];
    std::vector<std::size_t> extrema;
    for (const auto& bimf : d.bimfs) extrema.push_back(strict_extrema_count(bimf));
    out << "channel " << c << ": " << d.bimfs.size() << " BIMFs, windows "
        << join(d.meta.window_sizes) << ", extrema " << join(extrema) << "\n";
    if (d.bimfs.empty()) {
      err << "warning: channel " << c << " has too few extrema; residue only\n";
    } else if (d.meta.stopped_early) {
      err << "warning: channel " << c << " stopped after " << d.bimfs.size() << " of "
          << cfg.n_bimfs << " BIMFs\n";
    }
  }
  return kExitOk;
}

// --------------------------------------------------------------------- fuse

struct FuseArgs {
  std::string bundle;
  std::string output;
  std::optional<double> alpha;
  bool float_out = false;
  int bit_depth = 8;
};

bool within_unit(const MultiChannelField& f) {
  for (const auto& ch : f.channels()) {
    for (double v : ch.values()) {
      if (!(v >= 0.0 && v <= 1.0)) return false;
    }
  }
  return true;
}

int cmd_fuse(const FuseArgs& a, CliConfig cfg, std::ostream& out) {
  if (a.alpha) cfg.alpha = *a.alpha;
  cfg.validate();
  const io::DecompositionBundle b = io::read_decomposition_bundle(a.bundle);
  MultiChannelField fused = uv::fuse({b.sigma_c(), b.residue(), cfg.alpha});
  if (b.normalization() == bemd::Normalization::kSymmetricUnit) {
    fused.set_range(ValueRange::kSymmetricUnit);
    fused = to_unit(fused);
  }
  if (a.float_out) {
    if (fused.range() == ValueRange::kUnit && !within_unit(fused)) {
      fused.set_range(ValueRange::kUnbounded);
    }
    io::write_planes_bundle(a.output, fused);
  } else {
    io::write_png(a.output, fused, a.bit_depth);
  }
  out << "fused " << a.bundle << " with alpha " << std::setprecision(17) << cfg.alpha << " -> "
      << a.output << "\n";
  return kExitOk;
}

// ------------------------------------------------------------ spectral-diff

struct SpectralArgs {
  std::string dir_a;
  std::string dir_b;
  std::optional<std::size_t> sample;
  std::string heatmap;
  std::string save_spectra;
};

std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::kIo, dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error(ErrorCode::kEmptySet, dir.string() + " contains no PNG images");
  return out;
}

// k indices out of n, chosen by a partial Fisher-Yates shuffle, returned sorted.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k >= n) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t span = n - i;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    std::swap(idx[i], idx[i + static_cast<std::size_t>(draw % span)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

ScalarField grayscale(const MultiChannelField& image) {
  if (image.num_channels() == 1) return image.channel(0);
  return spectral::color_to_scalar(image);
}

void write_heatmap(const fs::path& path, const spectral::SpectrumStats& a,
                   const spectral::SpectrumStats& b) {
  const ScalarField sq = spectral::magnitude_difference(a, b);
  const std::size_t h = sq.height();
  const std::size_t w = sq.width();
  MultiChannelField img(h, w, 1, ValueRange::kUnit);
  double peak = 0.0;
  for (double v : sq.values()) peak = std::max(peak, std::log1p(v));
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      // DC moved to the centre.
      const double v = std::log1p(sq((r + h / 2) % h, (c + w / 2) % w));
      img(r, c, 0) = peak > 0.0 ? v / peak : 0.0;
    }
  }
  io::write_png(path, img);
}

int cmd_spectral_diff(const SpectralArgs& a, const CliConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto files_a = list_pngs(a.dir_a);
  auto files_b = list_pngs(a.dir_b);
  if (a.sample) {
    if (*a.sample == 0) throw Error(ErrorCode::kInvalidArgument, "--sample must be >= 1");
    std::vector<fs::path> picked;
    for (std::size_t i : sample_indices(files_b.size(), *a.sample, cfg.seed)) {
      picked.push_back(files_b[i]);
    }
    files_b = std::move(picked);
  }

  io::PngInfo first;
  io::read_png(files_a.front(), &first);
  auto stats_for = [&](const std::vector<fs::path>& files) {
    return spectral::mean_spectrum(
        files.size(), [&](std::size_t i) { return grayscale(io::read_png(files[i])); },
        first.height, first.width, cfg.jobs);
  };
  const spectral::SpectrumStats sa = stats_for(files_a);
  const spectral::SpectrumStats sb = stats_for(files_b);
  const double diff = spectral::spectral_difference(sa, sb);

  if (!a.heatmap.empty()) write_heatmap(a.heatmap, sa, sb);
  if (!a.save_spectra.empty()) {
    fs::create_directories(a.save_spectra);
    io::write_spectrum_bundle(fs::path(a.save_spectra) / "a", sa);
    io::write_spectrum_bundle(fs::path(a.save_spectra) / "b", sb);
  }
  out << std::setprecision(17) << diff << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- uv-extract

struct UvExtractArgs {
  std::string image;
  std::string positions;
  std::string output;
  std::string mask_out;
  bool float_out = false;
  int bit_depth = 8;
};

int cmd_uv_extract(const UvExtractArgs& a, std::ostream& out, std::ostream& err) {
  const MultiChannelField image = io::read_png(a.image);
  const io::PositionMapBundle pos = io::read_position_bundle(a.positions);
  const uv::ImageDims dims{image.height(), image.width()};
  if (pos.source.height != dims.height || pos.source.width != dims.width) {
    err << "warning: position map was built for " << pos.source.height << "x" << pos.source.width
        << ", image is " << dims.height << "x" << dims.width << "\n";
  }
  const auto violations = uv::validate_position_map(pos.map, dims);
  if (!violations.empty()) {
    const std::size_t shown = std::min<std::size_t>(violations.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) err << violations[i].message << "\n";
    if (violations.size() > shown) err << "... " << violations.size() - shown << " more\n";
    return kExitInvalid;
  }
  const uv::TextureMap t = uv::extract_texture(image, pos.map);

  fs::path mask_path = a.mask_out;
  if (mask_path.empty()) {
    const fs::path o(a.output);
    mask_path = o.parent_path() / (o.stem().string() + "_mask.png");
  }
  MultiChannelField mask(t.mask.height, t.mask.width, 1, ValueRange::kUnit);
  for (std::size_t i = 0; i < t.mask.values.size(); ++i) {
    mask.channel(0).values()[i] = t.mask.values[i] ? 1.0 : 0.0;
  }
  if (a.float_out) {
    io::write_planes_bundle(a.output, t.grid);
  } else {
    io::write_png(a.output, t.grid, a.bit_depth);
  }
  io::write_png(mask_path, mask);
  out << "extracted " << t.grid.height() << "x" << t.grid.width() << " texture -> " << a.output
      << " (mask " << mask_path.string() << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- loss-eval

struct LossArgs {
  std::string manifest;
  std::string output;
  std::string weights;
};

struct LoadedMap {
  MultiChannelField field;
  std::optional<std::vector<unsigned char>> mask;
};

LoadedMap load_map(const fs::path& path) {
  if (!io::is_bundle(path)) return {io::read_png(path), std::nullopt};
  const io::BundleManifest m = io::read_manifest(path);
  switch (m.kind) {
    case io::BundleKind::kPositionMap: {
      const auto b = io::read_position_bundle(path);
      return {MultiChannelField({b.map.x, b.map.y, b.map.z}, ValueRange::kUnbounded),
              b.map.mask.values};
    }
    case io::BundleKind::kDecomposition:
      return {io::read_decomposition_bundle(path).sigma_c(), std::nullopt};
    case io::BundleKind::kPlanes:
      return {io::read_planes_bundle(path), std::nullopt};
    case io::BundleKind::kSpectrum:
      break;
  }
  throw Error(ErrorCode::kFormat, path.string() + ": spectrum bundles are not loss inputs");
}

double map_l1(const LoadedMap& a, const LoadedMap& b) {
  if (!a.mask && !b.mask) return losses::l1_mean(a.field, b.field);
  std::vector<unsigned char> mask(a.field.height() * a.field.width(), 1);
  for (const auto* m : {&a.mask, &b.mask}) {
    if (!*m) continue;
    if ((*m)->size() != mask.size()) throw Error(ErrorCode::kShapeMismatch, "mask size mismatch");
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] &= (**m)[i];
  }
  return losses::l1_mean(a.field, b.field, mask);
}

std::vector<double> parse_numbers(const std::string& text, const std::string& where) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw Error(ErrorCode::kFormat, where + ": bad number '" + token + "'");
    }
    out.push_back(v);
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  return out;
}

class ManifestReader {
 public:
  explicit ManifestReader(fs::path base) : base_(std::move(base)) {}

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base_ / path;
  }

  std::vector<double> vector(const json& v, const std::string& where) const {
    if (v.is_array()) {
      std::vector<double> out;
      for (const auto& x : v) {
        if (!x.is_number()) throw Error(ErrorCode::kFormat, where + ": non-numeric entry");
        out.push_back(x.get<double>());
      }
      return out;
    }
    if (v.is_string()) {
      const auto bytes = io::read_file(resolve(v.get<std::string>()));
      return parse_numbers(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                           where);
    }
    throw Error(ErrorCode::kFormat, where + ": expected an array or a file path");
  }

  double pair_l1(const json& node, const char* a, const char* b, const std::string& where) const {
    if (!node.contains(a) || !node.contains(b)) {
      throw Error(ErrorCode::kFormat, where + " needs '" + a + "' and '" + b + "'");
    }
    return map_l1(load_map(resolve(node.at(a).get<std::string>())),
                  load_map(resolve(node.at(b).get<std::string>())));
  }

 private:
  fs::path base_;
};

double number_or(const json& node, const char* key, double fallback) {
  if (!node.contains(key)) return fallback;
  if (!node.at(key).is_number()) {
    throw Error(ErrorCode::kFormat, std::string("'") + key + "' must be a number");
  }
  return node.at(key).get<double>();
}

json report_to_json(const losses::LossReport& r) {
  json j;
  j["weights"] = weights_to_json(r.weights);
  j["shape"] = {{"rec", r.shape.rec}, {"cyc", r.shape.cyc}, {"adv", r.shape.adv},
                {"total", r.shape_total}};
  j["texture"] = {{"rec", r.texture.rec},
                  {"rec_imf", r.texture.rec_imf},
                  {"rec_refactored", r.rec_refactored},
                  {"cyc", r.texture.cyc},
                  {"cyc_imf", r.texture.cyc_imf},
                  {"cyc_refactored", r.cyc_refactored},
                  {"adv", r.texture.adv},
                  {"adv_imf", r.texture.adv_imf},
                  {"adv_refactored", r.adv_refactored},
                  {"age", r.texture.age},
                  {"id", r.texture.id},
                  {"total", r.texture_total}};
  j["total"] = r.total;
  j["consistent"] = losses::is_consistent(r);
  return j;
}

int cmd_loss_eval(const LossArgs& a, CliConfig cfg, std::ostream& out) {
  const auto bytes = io::read_file(a.manifest);
  json m;
  try {
    m = json::parse(reinterpret_cast<const char*>(bytes.data()),
                    reinterpret_cast<const char*>(bytes.data()) + bytes.size());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, a.manifest + ": " + e.what());
  }
  if (!m.is_object()) throw Error(ErrorCode::kFormat, "manifest must be a JSON object");
  if (m.contains("weights")) cfg.weights = apply_weights(cfg.weights, m.at("weights"));
  if (!a.weights.empty()) cfg.weights = read_weights_file(cfg.weights, a.weights);
  cfg.validate();

  const ManifestReader rd(fs::path(a.manifest).parent_path());
  const std::size_t n_groups = m.value("n_age_groups", std::size_t{6});
  const json shape = m.value("shape", json::object());
  const json texture = m.value("texture", json::object());

  auto l1_term = [&](const json& branch, const char* key, const std::string& where) {
    if (!branch.contains(key)) return 0.0;
    const json& node = branch.at(key);
    if (node.is_number()) return node.get<double>();
    return rd.pair_l1(node, "output", "target", where);
  };
  auto imf_term = [&](const char* key, const char* scalar_key) {
    if (texture.contains(key) && texture.at(key).is_object() &&
        texture.at(key).contains("imf_output")) {
      return rd.pair_l1(texture.at(key), "imf_output", "imf_target",
                        std::string("texture.") + key);
    }
    return number_or(texture, scalar_key, 0.0);
  };

  losses::ShapeTerms s;
  s.rec = l1_term(shape, "rec", "shape.rec");
  s.cyc = l1_term(shape, "cyc", "shape.cyc");
  s.adv = number_or(shape, "adv", 0.0);

  losses::TextureTerms t;
  t.rec = l1_term(texture, "rec", "texture.rec");
  t.rec_imf = imf_term("rec", "rec_imf");
  t.cyc = l1_term(texture, "cyc", "texture.cyc");
  t.cyc_imf = imf_term("cyc", "cyc_imf");
  t.adv = number_or(texture, "adv", 0.0);
  t.adv_imf = number_or(texture, "adv_imf", 0.0);
  if (texture.contains("id")) {
    const json& node = texture.at("id");
    t.id = node.is_number() ? node.get<double>()
                            : losses::identity_loss(rd.vector(node.at("source"), "texture.id.source"),
                                                    rd.vector(node.at("generated"),
                                                              "texture.id.generated"));
  }
  if (texture.contains("age")) {
    const json& node = texture.at("age");
    if (node.is_number()) {
      t.age = node.get<double>();
    } else {
      const auto z_tgt = losses::age_code(node.at("target_group").get<std::size_t>(), n_groups);
      const auto z_src = losses::age_code(node.at("source_group").get<std::size_t>(), n_groups);
      t.age = losses::age_loss(rd.vector(node.at("generated"), "texture.age.generated"), z_tgt,
                               rd.vector(node.at("real"), "texture.age.real"), z_src);
    }
  }

  const losses::LossReport report = losses::make_report(s, t, cfg.weights);
  const std::string text = report_to_json(report).dump(2) + "\n";
  if (a.output.empty()) {
    out << text;
  } else {
    io::write_file_atomic(a.output, text);
  }
  return losses::is_consistent(report) ? kExitOk : kExitInvalid;
}

// ------------------------------------------------------------------- emd1d

struct Emd1dArgs {
  std::string input;
  std::string output;
  std::optional<double> sd_threshold;
  std::optional<std::size_t> max_imfs;
  int max_sift_iterations = 50;
  std::size_t column = 0;
};

std::vector<double> read_csv_column(const fs::path& path, std::size_t column) {
  const auto bytes = io::read_file(path);
  std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (column >= cells.size()) {
      throw Error(ErrorCode::kFormat, path.string() + ":" + std::to_string(line_no) +
                                          ": no column " + std::to_string(column));
    }
    std::string v = cells[column];
    v.erase(0, v.find_first_not_of(" \t"));
    v.erase(v.find_last_not_of(" \t") + 1);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') {
      if (out.empty() && line_no == 1) continue;  // header
      throw Error(ErrorCode::kFormat, path.string() + ":" + std::to_string(line_no) +
                                          ": bad number '" + v + "'");
    }
    out.push_back(x);
  }
  return out;
}

int cmd_emd1d(const Emd1dArgs& a, CliConfig cfg, std::ostream& out) {
  if (a.sd_threshold) cfg.sd_threshold = *a.sd_threshold;
  cfg.validate();
  emd1d::SiftConfig sc;
  sc.sd_threshold = cfg.sd_threshold;
  sc.max_sift_iterations = a.max_sift_iterations;
  if (a.max_imfs) sc.max_imfs = *a.max_imfs;

  const auto signal = read_csv_column(a.input, a.column);
  const emd1d::Decomposition d = emd1d::decompose(signal, sc);

  std::ostringstream csv;
  csv << std::setprecision(17);
  for (std::size_t k = 0; k < d.imfs.size(); ++k) csv << "imf_" << k + 1 << ",";
  csv << "residue\n";
  for (std::size_t i = 0; i < signal.size(); ++i) {
    for (const auto& imf : d.imfs) csv << imf[i] << ",";
    csv << d.residue[i] << "\n";
  }
  if (a.output.empty()) {
    out << csv.str();
  } else {
    io::write_file_atomic(a.output, csv.str());
    std::vector<std::size_t> crossings;
    for (const auto& imf : d.imfs) crossings.push_back(emd1d::zero_crossings(imf));
    out << d.imfs.size() << " IMFs, sift iterations " << join(d.sift_iterations)
        << ", zero crossings " << join(crossings) << " -> " << a.output << "\n";
  }
  return kExitOk;
}

// -------------------------------------------------------------------- info

int cmd_info(const std::string& path, std::ostream& out, std::ostream& err) {
  if (!io::is_bundle(path)) {
    io::PngInfo info;
    io::read_png(path, &info);
    out << "png " << info.height << "x" << info.width << " channels=" << info.channels
        << " bit_depth=" << info.bit_depth << "\n";
    return kExitOk;
  }
  const io::BundleManifest m = io::read_manifest(path);
  out << "bundle kind=" << io::to_string(m.kind) << " " << m.height << "x" << m.width
      << " channels=" << m.channels << " files=" << m.files.size() << "\n";
  if (m.kind == io::BundleKind::kDecomposition) {
    out << "normalization=" << m.extra.value("normalization", std::string("?"))
        << " n_bimfs=" << m.extra.value("n_bimfs", json::array()).dump()
        << " window_sizes=" << m.extra.value("window_sizes", json::array()).dump() << "\n";
  }
  const auto problems = io::verify_bundle(path);
  for (const auto& p : problems) err << p << "\n";
  out << (problems.empty() ? "ok" : "INVALID") << "\n";
  return problems.empty() ? kExitOk : kExitInvalid;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EMD texture toolkit: bidimensional EMD, fusion, spectra and losses", "emdtex"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON config file (overrides $EMDTEX_CONFIG)");
  app.add_option("--jobs", jobs, "worker threads");
  app.add_option("--seed", seed, "seed for any sampling");

  DecomposeArgs dec;
  auto* sc_dec = app.add_subcommand("decompose", "FABEMD of a PNG or planes bundle");
  sc_dec->add_option("input", dec.input, "PNG file or planes bundle")->required();
  sc_dec->add_option("-o,--output", dec.output, "output bundle directory")->required();
  sc_dec->add_option("--n-bimfs", dec.n_bimfs, "BIMFs per channel");
  sc_dec->add_option("--window-rule", dec.window_rule, "min_adjacent_extrema_distance | max_adjacent_extrema_distance");
  sc_dec->add_flag("--no-smoothing", dec.no_smoothing, "skip the envelope mean filter");
  sc_dec->add_option("--fixed-window", dec.fixed_window, "pin every window to this odd width");
  sc_dec->add_option("--connectivity", dec.connectivity, "eight | four")
      ->check(CLI::IsMember({"eight", "four"}));
  sc_dec->add_flag("--no-normalize", dec.no_normalize, "decompose [0,1] input without mapping to [-1,1]");

  FuseArgs fu;
  auto* sc_fuse = app.add_subcommand("fuse", "alpha * sum(BIMFs) + residue");
  sc_fuse->add_option("bundle", fu.bundle, "decomposition bundle")->required();
  sc_fuse->add_option("-o,--output", fu.output, "output PNG (or planes bundle with --float-out)")->required();
  sc_fuse->add_option("--alpha", fu.alpha, "BIMF weight");
  sc_fuse->add_flag("--float-out", fu.float_out, "write exact f32 planes instead of PNG");
  sc_fuse->add_option("--bit-depth", fu.bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}));

  SpectralArgs sp;
  auto* sc_spec = app.add_subcommand("spectral-diff", "spectral difference between two image sets");
  sc_spec->add_option("dir_a", sp.dir_a, "generated images")->required();
  sc_spec->add_option("dir_b", sp.dir_b, "real images")->required();
  sc_spec->add_option("--sample", sp.sample, "randomly sample this many images from dir_b");
  sc_spec->add_option("--heatmap", sp.heatmap, "write a magnitude-difference heatmap PNG");
  sc_spec->add_option("--save-spectra", sp.save_spectra, "write spectrum bundles <dir>/a and <dir>/b");

  UvExtractArgs ux;
  auto* sc_uv = app.add_subcommand("uv-extract", "sample a UV texture from an image");
  sc_uv->add_option("image", ux.image, "source PNG")->required();
  sc_uv->add_option("positions", ux.positions, "position-map bundle")->required();
  sc_uv->add_option("-o,--output", ux.output, "texture PNG (or planes bundle with --float-out)")->required();
  sc_uv->add_option("--mask-out", ux.mask_out, "mask PNG (default <output stem>_mask.png)");
  sc_uv->add_flag("--float-out", ux.float_out, "write exact f32 planes instead of PNG");
  sc_uv->add_option("--bit-depth", ux.bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}));

  LossArgs lo;
  auto* sc_loss = app.add_subcommand("loss-eval", "evaluate the loss calculus from a manifest");
  sc_loss->add_option("manifest", lo.manifest, "manifest JSON")->required();
  sc_loss->add_option("-o,--output", lo.output, "report JSON (default stdout)");
  sc_loss->add_option("--weights", lo.weights, "JSON file with lambda_* overrides");

  Emd1dArgs e1;
  auto* sc_emd = app.add_subcommand("emd1d", "1D EMD of a CSV column");
  sc_emd->add_option("input", e1.input, "CSV file")->required();
  sc_emd->add_option("-o,--output", e1.output, "output CSV (default stdout)");
  sc_emd->add_option("--sd-threshold", e1.sd_threshold, "Cauchy SD stop threshold");
  sc_emd->add_option("--max-imfs", e1.max_imfs, "cap on extracted IMFs");
  sc_emd->add_option("--max-sift-iterations", e1.max_sift_iterations, "sifting iteration cap");
  sc_emd->add_option("--column", e1.column, "0-based CSV column");

  std::string info_path;
  auto* sc_info = app.add_subcommand("info", "describe a PNG or verify a bundle");
  sc_info->add_option("path", info_path, "PNG file or bundle directory")->required();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("emdtex");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "emdtex: " << e.what() << "\n";
    return kExitIo;
  }

  try {
    CliConfig cfg;
    if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') {
      apply_config_file(cfg, env);
    }
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    if (jobs) cfg.jobs = *jobs;
    if (seed) cfg.seed = *seed;

    if (sc_dec->parsed()) return cmd_decompose(dec, cfg, out, err);
    if (sc_fuse->parsed()) return cmd_fuse(fu, cfg, out);
    if (sc_spec->parsed()) return cmd_spectral_diff(sp, cfg, out);
    if (sc_uv->parsed()) return cmd_uv_extract(ux, out, err);
    if (sc_loss->parsed()) return cmd_loss_eval(lo, cfg, out);
    if (sc_emd->parsed()) return cmd_emd1d(e1, cfg, out);
    if (sc_info->parsed()) return cmd_info(info_path, out, err);
  } catch (const Error& e) {
    err << "emdtex: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "emdtex: FormatError: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "emdtex: IoError: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitIo;
}

}  // namespace emdtex::cli
