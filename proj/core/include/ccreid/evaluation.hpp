#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ccreid/numerics.hpp"

namespace ccreid {

enum class EvalSetting { ClothingChange, SameClothing };
enum class Shot { Single, Multi };
enum class Role { Query, Gallery };

struct EvalProtocol {
  EvalSetting setting = EvalSetting::ClothingChange;
  Shot shot = Shot::Single;
  /// Drops same-identity gallery entries seen by the query's own camera.
  bool exclude_same_camera = true;
  std::vector<int> ranks = {1, 5, 10, 20};
  std::uint64_t seed = 0;

  /// Throws InvalidConfig unless ranks are non-empty, positive and ascending.
  void validate() const;
};

struct EvalRecord {
  Vector feature;
  int identity_id = 0;
  int clothing_id = 0;
  int camera_id = 0;
  Role role = Role::Query;
};

enum class MatchFlag : std::int8_t { NonMatch = 0, Match = 1, Ignore = -1 };

/// Query × gallery relation. Ignored entries are removed from the ranking.
class MatchMatrix {
 public:
  MatchMatrix() = default;
  MatchMatrix(std::size_t queries, std::size_t gallery, MatchFlag fill = MatchFlag::NonMatch)
      : rows_(queries), cols_(gallery), flags_(queries * gallery, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  MatchFlag operator()(std::size_t q, std::size_t g) const { return flags_[q * cols_ + g]; }
  MatchFlag& operator()(std::size_t q, std::size_t g) { return flags_[q * cols_ + g]; }
  std::size_t matches_in_row(std::size_t q) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<MatchFlag> flags_;
};

/// Match rule for one query/gallery pair under a protocol.
MatchFlag match_flag(const EvalRecord& query, const EvalRecord& gallery, const EvalProtocol& protocol);

struct ProtocolSplit {
  std::vector<EvalRecord> queries;
  std::vector<EvalRecord> gallery;
  MatchMatrix flags;
  /// Query-role records left out because they had no valid match.
  std::size_t dropped_queries = 0;
};

/// Splits records by role. Single-shot keeps one uniformly drawn gallery record
/// per identity. Queries without any valid match are dropped; when every query
/// of some identity is dropped, throws NoValidMatch naming those identities.
ProtocolSplit build_protocol_split(std::span<const EvalRecord> records, const EvalProtocol& protocol, Rng& rng);

/// |Q| × |G| cosine distances. Throws Empty.
Matrix distance_matrix(std::span<const EvalRecord> queries, std::span<const EvalRecord> gallery);

/// Rank-k accuracy for each requested k. Gallery entries are ordered by
/// ascending distance with ties broken by gallery index. Throws NoValidMatch
/// for a query row without matches and DimensionMismatch on shape errors.
std::vector<double> cmc(const Matrix& distances, const MatchMatrix& flags, std::span<const int> ranks);

/// Average precision of each query.
std::vector<double> average_precisions(const Matrix& distances, const MatchMatrix& flags);

double mean_ap(const Matrix& distances, const MatchMatrix& flags);

struct Metrics {
  std::vector<int> ranks;
  std::vector<double> cmc;
  double mean_ap = 0.0;
  std::vector<double> per_query_ap;
  std::size_t num_queries = 0;
  std::size_t num_gallery = 0;

  /// Accuracy at rank k; throws InvalidConfig when k was not evaluated.
  double rank(int k) const;
};

/// Full protocol: split (seeded from `protocol.seed`), distances, metrics.
Metrics evaluate(std::span<const EvalRecord> records, const EvalProtocol& protocol);

/// key=value lines: rank{k} for every evaluated k, then mAP, queries, gallery.
void write_metrics_report(const std::filesystem::path& path, const Metrics& metrics);
/// CSV with columns query_index, ap.
void write_per_query_ap_csv(const std::filesystem::path& path, const Metrics& metrics);

}  // namespace ccreid
