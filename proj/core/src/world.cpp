#include "ccreid/world.hpp"

#include <cmath>

namespace ccreid {

std::string WorldConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (num_identities < 1) fail("num_identities must be >= 1");
  if (clothes_per_identity < 1) fail("clothes_per_identity must be >= 1");
  if (samples_per_identity_clothing < 1) fail("samples_per_identity_clothing must be >= 1");
  if (num_cameras < 1) fail("num_cameras must be >= 1");
  if (embedding_dim < 1) fail("embedding_dim must be >= 1");
  if (identity_latent_dim < 1 || clothing_latent_dim < 1) fail("latent dimensions must be >= 1");
  if (identity_latent_dim + clothing_latent_dim > embedding_dim) {
    fail("identity_latent_dim + clothing_latent_dim must not exceed embedding_dim");
  }
  if (!(max_identity_cosine > -1.0 && max_identity_cosine <= 1.0)) fail("max_identity_cosine must lie in (-1, 1]");
  if (num_templates < 1) fail("num_templates must be >= 1");
  if (num_train_identities < 1 || num_train_identities > num_identities) {
    fail("num_train_identities must lie in [1, num_identities]");
  }
  for (double s : {identity_scale, clothing_scale, noise_scale}) {
    if (!std::isfinite(s) || s < 0.0) fail("scales must be finite and non-negative");
  }
  if (!(identity_scale > clothing_scale && clothing_scale >= noise_scale)) {
    return "scale ordering identity > clothing >= noise does not hold; the world may not be learnable";
  }
  return {};
}

namespace {

Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Fill in row-major order so the stream layout does not depend on Eigen's storage order.
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = stddev * normal(rng);
  return m;
}

Vector gaussian_vector(Rng& rng, Eigen::Index n, double stddev) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = stddev * normal(rng);
  return v;
}

}  // namespace

SyntheticWorld SyntheticWorld::generate(const WorldConfig& config) {
  config.validate();
  SyntheticWorld w;
  w.config_ = config;
  Rng rng(config.seed);

  const Eigen::Index dim = config.embedding_dim;
  // Orthonormal basis from the QR factorization of a Gaussian matrix; the
  // first columns map identities, the next ones map clothing.
  const Matrix basis = Eigen::HouseholderQR<Matrix>(gaussian_matrix(rng, dim, dim, 1.0)).householderQ();
  w.identity_map_ = basis.leftCols(config.identity_latent_dim);
  w.clothing_map_ = basis.middleCols(config.identity_latent_dim, config.clothing_latent_dim);

  constexpr int kMaxDrawsPerIdentity = 100000;
  for (int id = 0; id < config.num_identities; ++id) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxDrawsPerIdentity) {
        throw Error(ErrorCode::InvalidConfig, "cannot place identity " + std::to_string(id) +
                                                  " under max_identity_cosine; raise it or the latent dimension");
      }
      Vector e = gaussian_vector(rng, config.identity_latent_dim, config.identity_scale);
      const double norm = e.norm();
      bool separated = norm > 0.0;
      // Separation is enforced among identities sharing a split; train and
      // test identities are never compared against each other.
      const bool is_train = id < config.num_train_identities;
      const int first = is_train ? 0 : config.num_train_identities;
      for (int other = first; other < id && separated; ++other) {
        const Vector& o = w.identity_latents_[static_cast<std::size_t>(other)];
        separated = e.dot(o) / (norm * o.norm()) <= config.max_identity_cosine;
      }
      if (separated) {
        w.identity_latents_.push_back(std::move(e));
        break;
      }
    }
  }
  for (int id = 0; id < config.num_identities; ++id) {
    for (int c = 0; c < config.clothes_per_identity; ++c) {
      w.clothing_latents_.push_back(gaussian_vector(rng, config.clothing_latent_dim, config.clothing_scale));
    }
  }
  // Templates come after the dataset outfits in the stream, so they are fresh
  // draws from the same distribution and never coincide with a dataset outfit.
  for (int t = 0; t < config.num_templates; ++t) {
    w.templates_.push_back(StyleTemplate{gaussian_vector(rng, config.clothing_latent_dim, config.clothing_scale), t});
  }

  w.samples_.reserve(static_cast<std::size_t>(config.num_samples()));
  for (int id = 0; id < config.num_identities; ++id) {
    for (int c = 0; c < config.clothes_per_identity; ++c) {
      const Vector clean = w.identity_map_ * w.identity_latent(id) + w.clothing_map_ * w.clothing_latent(id, c);
      for (int k = 0; k < config.samples_per_identity_clothing; ++k) {
        Sample s;
        s.raw = clean + gaussian_vector(rng, dim, config.noise_scale);
        s.identity_id = id;
        s.clothing_id = c;
        s.camera_id = k % config.num_cameras;
        s.is_synthetic = false;
        if (id < config.num_train_identities) {
          s.split = Split::Train;
        } else if (config.layout == TestLayout::ByClothing) {
          s.split = c == 0 ? Split::Gallery : Split::Query;
        } else {
          s.split = s.camera_id == 0 ? Split::Gallery : Split::Query;
        }
        w.samples_.push_back(std::move(s));
      }
    }
  }
  return w;
}

const Vector& SyntheticWorld::identity_latent(int identity) const {
  if (identity < 0 || identity >= config_.num_identities) {
    throw Error(ErrorCode::InvalidConfig, "identity " + std::to_string(identity) + " out of range");
  }
  return identity_latents_[static_cast<std::size_t>(identity)];
}

const Vector& SyntheticWorld::clothing_latent(int identity, int clothing) const {
  if (identity < 0 || identity >= config_.num_identities || clothing < 0 ||
      clothing >= config_.clothes_per_identity) {
    throw Error(ErrorCode::InvalidConfig, "clothing (" + std::to_string(identity) + ", " +
                                              std::to_string(clothing) + ") out of range");
  }
  return clothing_latents_[static_cast<std::size_t>(identity * config_.clothes_per_identity + clothing)];
}

Vector SyntheticWorld::noise_of(const Sample& s) const {
  return s.raw - identity_map_ * identity_latent(s.identity_id) -
         clothing_map_ * clothing_latent(s.identity_id, s.clothing_id);
}

Sample SyntheticWorld::swap(const Sample& x, const StyleTemplate& style) const {
  if (style.style_vector.size() != config_.clothing_latent_dim) {
    throw Error(ErrorCode::DimensionMismatch, "style vector has the wrong dimension");
  }
  Sample out = x;
  out.raw = x.raw + clothing_map_ * (style.style_vector - clothing_latent(x.identity_id, x.clothing_id));
  out.is_synthetic = true;
  return out;
}

std::vector<Sample> SyntheticWorld::subset(Split split) const {
  std::vector<Sample> out;
  for (const Sample& s : samples_)
    if (s.split == split) out.push_back(s);
  return out;
}

std::vector<Sample> generate_sync(const ClothingSwapGenerator& generator, const Sample& x,
                                  std::span<const StyleTemplate> templates) {
  if (templates.empty()) throw Error(ErrorCode::EmptyTemplateBank, "no style templates supplied");
  if (x.is_synthetic) throw Error(ErrorCode::SyntheticInput, "refusing to augment a synthetic sample");
  std::vector<Sample> out;
  out.reserve(templates.size());
  for (const StyleTemplate& t : templates) out.push_back(generator.swap(x, t));
  return out;
}

}  // namespace ccreid
