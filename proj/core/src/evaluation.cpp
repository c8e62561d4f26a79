#include "ccreid/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace ccreid {

void EvalProtocol::validate() const {
  if (ranks.empty()) throw Error(ErrorCode::InvalidConfig, "at least one rank is required");
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] < 1) throw Error(ErrorCode::InvalidConfig, "ranks must be >= 1");
    if (i > 0 && ranks[i] <= ranks[i - 1]) throw Error(ErrorCode::InvalidConfig, "ranks must be ascending");
  }
}

std::size_t MatchMatrix::matches_in_row(std::size_t q) const {
  std::size_t n = 0;
  for (std::size_t g = 0; g < cols_; ++g) n += (*this)(q, g) == MatchFlag::Match ? 1 : 0;
  return n;
}

MatchFlag match_flag(const EvalRecord& query, const EvalRecord& gallery, const EvalProtocol& protocol) {
  if (query.identity_id != gallery.identity_id) return MatchFlag::NonMatch;
  if (protocol.exclude_same_camera && query.camera_id == gallery.camera_id) return MatchFlag::Ignore;
  const bool same_clothes = query.clothing_id == gallery.clothing_id;
  if (protocol.setting == EvalSetting::ClothingChange) return same_clothes ? MatchFlag::Ignore : MatchFlag::Match;
  return same_clothes ? MatchFlag::Match : MatchFlag::Ignore;
}

ProtocolSplit build_protocol_split(std::span<const EvalRecord> records, const EvalProtocol& protocol, Rng& rng) {
  protocol.validate();
  std::vector<EvalRecord> candidates_q;
  std::map<int, std::vector<std::size_t>> gallery_by_identity;
  ProtocolSplit split;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].role == Role::Query) {
      candidates_q.push_back(records[i]);
    } else {
      gallery_by_identity[records[i].identity_id].push_back(i);
    }
  }
  if (protocol.shot == Shot::Single) {
    for (const auto& [identity, idx] : gallery_by_identity) {
      std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
      split.gallery.push_back(records[idx[pick(rng)]]);
    }
  } else {
    for (const EvalRecord& r : records)
      if (r.role == Role::Gallery) split.gallery.push_back(r);
  }

  std::map<int, bool> identity_has_valid;
  std::vector<std::vector<MatchFlag>> kept_rows;
  for (const EvalRecord& q : candidates_q) {
    std::vector<MatchFlag> row(split.gallery.size());
    bool any = false;
    for (std::size_t g = 0; g < split.gallery.size(); ++g) {
      row[g] = match_flag(q, split.gallery[g], protocol);
      any = any || row[g] == MatchFlag::Match;
    }
    identity_has_valid[q.identity_id] = identity_has_valid[q.identity_id] || any;
    if (any) {
      split.queries.push_back(q);
      kept_rows.push_back(std::move(row));
    } else {
      ++split.dropped_queries;
    }
  }
  std::string missing;
  for (const auto& [identity, ok] : identity_has_valid) {
    if (!ok) missing += (missing.empty() ? "" : ",") + std::to_string(identity);
  }
  if (!missing.empty()) throw Error(ErrorCode::NoValidMatch, "identities without a valid gallery match: " + missing);
  if (split.queries.empty()) throw Error(ErrorCode::NoValidMatch, "no query records");

  split.flags = MatchMatrix(split.queries.size(), split.gallery.size());
  for (std::size_t q = 0; q < kept_rows.size(); ++q)
    for (std::size_t g = 0; g < split.gallery.size(); ++g) split.flags(q, g) = kept_rows[q][g];
  return split;
}

Matrix distance_matrix(std::span<const EvalRecord> queries, std::span<const EvalRecord> gallery) {
  if (queries.empty() || gallery.empty()) throw Error(ErrorCode::Empty, "distance matrix needs queries and gallery");
  Matrix d(static_cast<Eigen::Index>(queries.size()), static_cast<Eigen::Index>(gallery.size()));
  for (std::size_t q = 0; q < queries.size(); ++q)
    for (std::size_t g = 0; g < gallery.size(); ++g)
      d(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(g)) = cosine_distance(queries[q].feature, gallery[g].feature);
  return d;
}

namespace {

void check_shapes(const Matrix& distances, const MatchMatrix& flags) {
  if (static_cast<std::size_t>(distances.rows()) != flags.rows() ||
      static_cast<std::size_t>(distances.cols()) != flags.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "distance matrix and match flags differ in shape");
  }
  if (flags.rows() == 0) throw Error(ErrorCode::Empty, "no queries");
}

// Match indicators of one query's ranked list, ignored entries removed.
std::vector<bool> ranked_matches(const Matrix& distances, const MatchMatrix& flags, std::size_t q) {
  std::vector<std::size_t> order;
  order.reserve(flags.cols());
  for (std::size_t g = 0; g < flags.cols(); ++g)
    if (flags(q, g) != MatchFlag::Ignore) order.push_back(g);
  const auto row = static_cast<Eigen::Index>(q);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return distances(row, static_cast<Eigen::Index>(a)) < distances(row, static_cast<Eigen::Index>(b));
  });
  std::vector<bool> out(order.size());
  bool any = false;
  for (std::size_t i = 0; i < order.size(); ++i) {
    out[i] = flags(q, order[i]) == MatchFlag::Match;
    any = any || out[i];
  }
  if (!any) throw Error(ErrorCode::NoValidMatch, "query " + std::to_string(q) + " has no valid match");
  return out;
}

}  // namespace

std::vector<double> cmc(const Matrix& distances, const MatchMatrix& flags, std::span<const int> ranks) {
  check_shapes(distances, flags);
  if (ranks.empty()) throw Error(ErrorCode::InvalidConfig, "no ranks requested");
  std::vector<std::size_t> hits(ranks.size(), 0);
  for (std::size_t q = 0; q < flags.rows(); ++q) {
    const std::vector<bool> ranked = ranked_matches(distances, flags, q);
    const auto first = static_cast<std::size_t>(std::find(ranked.begin(), ranked.end(), true) - ranked.begin());
    for (std::size_t k = 0; k < ranks.size(); ++k) {
      if (ranks[k] < 1) throw Error(ErrorCode::InvalidConfig, "ranks must be >= 1");
      if (first < static_cast<std::size_t>(ranks[k])) ++hits[k];
    }
  }
  std::vector<double> out(ranks.size());
  for (std::size_t k = 0; k < ranks.size(); ++k) out[k] = static_cast<double>(hits[k]) / static_cast<double>(flags.rows());
  return out;
}

std::vector<double> average_precisions(const Matrix& distances, const MatchMatrix& flags) {
  check_shapes(distances, flags);
  std::vector<double> out;
  out.reserve(flags.rows());
  for (std::size_t q = 0; q < flags.rows(); ++q) {
    const std::vector<bool> ranked = ranked_matches(distances, flags, q);
    double precision_sum = 0.0;
    std::size_t found = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (!ranked[i]) continue;
      ++found;
      precision_sum += static_cast<double>(found) / static_cast<double>(i + 1);
    }
    out.push_back(precision_sum / static_cast<double>(found));
  }
  return out;
}

double mean_ap(const Matrix& distances, const MatchMatrix& flags) {
  const std::vector<double> aps = average_precisions(distances, flags);
  return std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
}

double Metrics::rank(int k) const {
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (ranks[i] == k) return cmc[i];
  throw Error(ErrorCode::InvalidConfig, "rank " + std::to_string(k) + " was not evaluated");
}

Metrics evaluate(std::span<const EvalRecord> records, const EvalProtocol& protocol) {
  Rng rng(protocol.seed);
  const ProtocolSplit split = build_protocol_split(records, protocol, rng);
  const Matrix d = distance_matrix(split.queries, split.gallery);
  Metrics m;
  m.ranks = protocol.ranks;
  m.cmc = cmc(d, split.flags, protocol.ranks);
  m.per_query_ap = average_precisions(d, split.flags);
  m.mean_ap = std::accumulate(m.per_query_ap.begin(), m.per_query_ap.end(), 0.0) /
              static_cast<double>(m.per_query_ap.size());
  m.num_queries = split.queries.size();
  m.num_gallery = split.gallery.size();
  return m;
}

void write_metrics_report(const std::filesystem::path& path, const Metrics& metrics) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < metrics.ranks.size(); ++i) out << "rank" << metrics.ranks[i] << '=' << metrics.cmc[i] << '\n';
  out << "mAP=" << metrics.mean_ap << '\n';
  out << "queries=" << metrics.num_queries << '\n';
  out << "gallery=" << metrics.num_gallery << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void write_per_query_ap_csv(const std::filesystem::path& path, const Metrics& metrics) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  out << "query_index,ap\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t q = 0; q < metrics.per_query_ap.size(); ++q) out << q << ',' << metrics.per_query_ap[q] << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace ccreid
