#include "ccreid/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>

#include "binary_io.hpp"

namespace ccreid {
namespace {

constexpr std::array<char, 8> kMagic = {'C', 'C', 'R', 'D', 'S', 'E', 'T', '\0'};

void write_config(BinaryWriter& out, const WorldConfig& c) {
  out.i32(c.num_identities);
  out.i32(c.clothes_per_identity);
  out.i32(c.samples_per_identity_clothing);
  out.i32(c.num_cameras);
  out.i32(c.embedding_dim);
  out.i32(c.identity_latent_dim);
  out.i32(c.clothing_latent_dim);
  out.f64(c.identity_scale);
  out.f64(c.clothing_scale);
  out.f64(c.noise_scale);
  out.u64(c.seed);
  out.i32(c.num_train_identities);
  out.u8(static_cast<std::uint8_t>(c.layout));
  out.i32(c.num_templates);
  out.f64(c.max_identity_cosine);
}

WorldConfig read_config(BinaryReader& in) {
  WorldConfig c;
  c.num_identities = in.i32("num_identities");
  c.clothes_per_identity = in.i32("clothes_per_identity");
  c.samples_per_identity_clothing = in.i32("samples_per_identity_clothing");
  c.num_cameras = in.i32("num_cameras");
  c.embedding_dim = in.i32("embedding_dim");
  c.identity_latent_dim = in.i32("identity_latent_dim");
  c.clothing_latent_dim = in.i32("clothing_latent_dim");
  c.identity_scale = in.f64("identity_scale");
  c.clothing_scale = in.f64("clothing_scale");
  c.noise_scale = in.f64("noise_scale");
  c.seed = in.u64("seed");
  c.num_train_identities = in.i32("num_train_identities");
  const std::uint8_t layout = in.u8("layout");
  if (layout > 1) throw Error(ErrorCode::FormatError, "header: unknown test layout " + std::to_string(layout));
  c.layout = static_cast<TestLayout>(layout);
  c.num_templates = in.i32("num_templates");
  c.max_identity_cosine = in.f64("max_identity_cosine");
  return c;
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  const auto dim = static_cast<std::uint32_t>(dataset.config.embedding_dim);
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    if (dataset.samples[i].raw.size() != static_cast<Eigen::Index>(dim)) {
      throw Error(ErrorCode::DimensionMismatch, "sample " + std::to_string(i) + " does not match dimension " +
                                                    std::to_string(dim));
    }
  }
  BinaryWriter out(path);
  out.bytes(kMagic.data(), kMagic.size());
  out.u32(kDatasetFormatVersion);
  out.u32(dim);
  out.u64(dataset.samples.size());
  write_config(out, dataset.config);
  for (const Sample& s : dataset.samples) {
    out.i32(s.identity_id);
    out.i32(s.clothing_id);
    out.i32(s.camera_id);
    out.u8(s.is_synthetic ? 1 : 0);
    out.u8(static_cast<std::uint8_t>(s.split));
    out.u16(0);
    for (Eigen::Index k = 0; k < s.raw.size(); ++k) out.f64(s.raw[k]);
  }
  out.finish();
}

Dataset read_dataset(const std::filesystem::path& path) {
  BinaryReader in(path);
  std::array<char, 8> magic{};
  in.bytes(magic.data(), magic.size(), "magic");
  if (magic != kMagic) throw Error(ErrorCode::FormatError, "header: bad magic, not a dataset file");
  const std::uint32_t version = in.u32("version");
  if (version != kDatasetFormatVersion) {
    throw Error(ErrorCode::FormatError, "header: unsupported version " + std::to_string(version));
  }
  const std::uint32_t dim = in.u32("dim");
  const std::uint64_t count = in.u64("count");
  Dataset ds;
  ds.config = read_config(in);
  if (static_cast<std::uint32_t>(ds.config.embedding_dim) != dim) {
    throw Error(ErrorCode::FormatError, "header: dim disagrees with embedding_dim");
  }
  const std::uint64_t record_bytes = 16 + 8ULL * dim;
  ds.samples.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, in.remaining() / record_bytes)));
  for (std::uint64_t r = 0; r < count; ++r) {
    try {
      Sample s;
      s.identity_id = in.i32("identity_id");
      s.clothing_id = in.i32("clothing_id");
      s.camera_id = in.i32("camera_id");
      const std::uint8_t synthetic = in.u8("is_synthetic");
      const std::uint8_t split = in.u8("split");
      in.u16("reserved");
      if (synthetic > 1) throw Error(ErrorCode::FormatError, "is_synthetic flag out of range");
      if (split > 2) throw Error(ErrorCode::FormatError, "split out of range");
      s.is_synthetic = synthetic == 1;
      s.split = static_cast<Split>(split);
      s.raw.resize(dim);
      for (std::uint32_t k = 0; k < dim; ++k) s.raw[k] = in.f64("value");
      if (!s.raw.allFinite()) throw Error(ErrorCode::FormatError, "non-finite value");
      ds.samples.push_back(std::move(s));
    } catch (const Error& e) {
      throw Error(ErrorCode::FormatError, "record " + std::to_string(r) + ": " + e.what());
    }
  }
  if (in.remaining() != 0) throw Error(ErrorCode::FormatError, "trailing bytes after last record");
  return ds;
}

void write_dataset_csv(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const Eigen::Index dim = samples.empty() ? 0 : samples.front().raw.size();
  out << "identity_id,clothing_id,camera_id,is_synthetic,split";
  for (Eigen::Index k = 0; k < dim; ++k) out << ",v" << k;
  out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const Sample& s : samples) {
    out << s.identity_id << ',' << s.clothing_id << ',' << s.camera_id << ',' << (s.is_synthetic ? 1 : 0) << ','
        << static_cast<int>(s.split);
    for (Eigen::Index k = 0; k < s.raw.size(); ++k) out << ',' << s.raw[k];
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Dataset dataset_from_world(const SyntheticWorld& world) { return Dataset{world.config(), world.samples()}; }

}  // namespace ccreid
