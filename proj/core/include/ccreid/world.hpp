#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ccreid/numerics.hpp"

namespace ccreid {

enum class Split : std::uint8_t { Train = 0, Query = 1, Gallery = 2 };

/// How held-out identities are divided between query and gallery.
///  - ByClothing: clothing 0 of each test identity goes to the gallery, every
///    other outfit to the query set (whole (identity, clothing) groups).
///  - ByCamera: camera 0 samples go to the gallery, other cameras to the
///    query set, so both sides hold every outfit (needed by the same-clothing
///    protocol).
enum class TestLayout : std::uint8_t { ByClothing = 0, ByCamera = 1 };

struct WorldConfig {
  int num_identities = 50;
  int clothes_per_identity = 4;
  int samples_per_identity_clothing = 6;
  int num_cameras = 3;
  int embedding_dim = 32;
  int identity_latent_dim = 16;
  int clothing_latent_dim = 16;
  double identity_scale = 1.0;
  double clothing_scale = 0.95;
  double noise_scale = 0.1;
  /// Identity latents are redrawn until their cosine with every earlier
  /// identity of the same split (train or held out) is at most this value.
  /// 1 disables the constraint.
  double max_identity_cosine = 0.3;
  std::uint64_t seed = 1;
  /// Identities [0, num_train_identities) form the unlabeled training set;
  /// the rest are held out for evaluation.
  int num_train_identities = 25;
  TestLayout layout = TestLayout::ByClothing;
  /// Size of the clothing-style template bank used for augmentation.
  int num_templates = 16;

  /// Throws InvalidConfig (also when the latent dimensions do not fit in
  /// embedding_dim). Returns a warning (empty when none) when the scale
  /// ordering identity > clothing ≥ noise does not hold.
  std::string validate() const;
  int num_samples() const { return num_identities * clothes_per_identity * samples_per_identity_clothing; }
};

struct Sample {
  Vector raw;
  int identity_id = 0;
  int clothing_id = 0;
  int camera_id = 0;
  bool is_synthetic = false;
  Split split = Split::Train;

  bool operator==(const Sample&) const = default;
};

struct StyleTemplate {
  Vector style_vector;
  int template_id = 0;
};

/// Stand-in for a frozen person-image synthesis model: renders a sample in a
/// different outfit while keeping who the person is.
class ClothingSwapGenerator {
 public:
  virtual ~ClothingSwapGenerator() = default;
  virtual Sample swap(const Sample& x, const StyleTemplate& style) const = 0;
};

/// Linear latent-factor world: raw = A·e(identity) + B·c(identity, clothing) + ε.
///
/// A and B have orthonormal columns spanning orthogonal subspaces, so the
/// identity and clothing factors are separable by a linear projection.
/// Every latent is drawn once from a generator seeded with `config.seed`, so
/// the whole world (samples, split, maps, template bank) is a pure function of
/// the config.
class SyntheticWorld final : public ClothingSwapGenerator {
 public:
  static SyntheticWorld generate(const WorldConfig& config);

  const WorldConfig& config() const noexcept { return config_; }
  const std::vector<Sample>& samples() const noexcept { return samples_; }
  const std::vector<StyleTemplate>& templates() const noexcept { return templates_; }

  const Matrix& identity_map() const noexcept { return identity_map_; }
  const Matrix& clothing_map() const noexcept { return clothing_map_; }
  const Vector& identity_latent(int identity) const;
  const Vector& clothing_latent(int identity, int clothing) const;
  /// raw − A·e − B·c for an original sample.
  Vector noise_of(const Sample& s) const;

  /// Keeps the identity component, camera and noise of `x` and swaps its
  /// clothing component for B·style.
  Sample swap(const Sample& x, const StyleTemplate& style) const override;

  std::vector<Sample> subset(Split split) const;

 private:
  WorldConfig config_;
  Matrix identity_map_;
  Matrix clothing_map_;
  std::vector<Vector> identity_latents_;
  std::vector<Vector> clothing_latents_;
  std::vector<Sample> samples_;
  std::vector<StyleTemplate> templates_;
};

/// S clothing-changed copies of an original sample, one per template, in
/// template order. Throws EmptyTemplateBank or SyntheticInput.
std::vector<Sample> generate_sync(const ClothingSwapGenerator& generator, const Sample& x,
                                  std::span<const StyleTemplate> templates);

}  // namespace ccreid
