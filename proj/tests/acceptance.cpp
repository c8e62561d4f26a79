// End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
//
//   acceptance [--only N[,N...]] [--expect-fail N[,N...]]
//
// Exit status is 0 when every evaluated criterion passes, except those listed
// in --expect-fail, which must fail (so a known shortfall stays visible as a
// FAIL line without breaking the suite, and an unexpected pass is reported).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ccreid/clustering.hpp"
#include "ccreid/contrast.hpp"
#include "ccreid/encoder.hpp"
#include "ccreid/evaluation.hpp"
#include "ccreid/memory_bank.hpp"
#include "ccreid/pipeline.hpp"
#include "ccreid/tape.hpp"
#include "ccreid/world.hpp"
#include "oracles.hpp"

using namespace ccreid;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << v;
  return s.str();
}

Matrix gaussian(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

// ---------------------------------------------------------------- criterion 1

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Extended-precision forward pass of L = L_q + α·L_s, written independently of
// the library's tape.
long double reference_loss(const std::vector<Matrix>& tensors, const Matrix& inputs, const Matrix& candidates,
                           const std::vector<int>& owners, const std::vector<int>& row_labels, std::size_t group,
                           double tau, double alpha) {
  LMat h = inputs.cast<long double>();
  const std::size_t layers = tensors.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    h = h * tensors[2 * l].cast<long double>();
    h.rowwise() += tensors[2 * l + 1].cast<long double>().row(0);
    if (l + 1 < layers) h = h.unaryExpr([](long double v) { return std::tanh(v); });
  }
  for (Eigen::Index r = 0; r < h.rows(); ++r) h.row(r) /= std::sqrt(h.row(r).squaredNorm());

  const LMat logits = h * candidates.cast<long double>().transpose() / static_cast<long double>(tau);
  long double lq = 0.0L;
  int pairs = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const long double mx = logits.row(r).maxCoeff();
    long double z = 0.0L;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) z += std::exp(logits(r, j) - mx);
    const long double lse = mx + std::log(z);
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      if (owners[static_cast<std::size_t>(j)] != row_labels[static_cast<std::size_t>(r)]) continue;
      lq += lse - logits(r, j);
      ++pairs;
    }
  }
  lq /= pairs;

  auto log_softmax = [](const LMat& row) {
    const long double mx = row.maxCoeff();
    long double z = 0.0L;
    for (Eigen::Index j = 0; j < row.cols(); ++j) z += std::exp(row(0, j) - mx);
    LMat out = row;
    for (Eigen::Index j = 0; j < row.cols(); ++j) out(0, j) = row(0, j) - mx - std::log(z);
    return out;
  };
  long double ls = 0.0L;
  int kl_pairs = 0;
  for (Eigen::Index base = 0; base < h.rows(); base += static_cast<Eigen::Index>(group)) {
    for (std::size_t a = 0; a < group; ++a) {
      for (std::size_t b = 0; b < group; ++b) {
        if (a == b) continue;
        const LMat la = log_softmax(h.row(base + static_cast<Eigen::Index>(a)));
        const LMat lb = log_softmax(h.row(base + static_cast<Eigen::Index>(b)));
        for (Eigen::Index j = 0; j < la.cols(); ++j) ls += std::exp(la(0, j)) * (la(0, j) - lb(0, j));
        ++kl_pairs;
      }
    }
  }
  if (kl_pairs > 0) ls /= kl_pairs;
  return lq + static_cast<long double>(alpha) * ls;
}

Outcome criterion_gradients() {
  constexpr int kSeeds = 10;
  constexpr int kCoordsPerSeed = 100;
  constexpr double kStep = 1e-5;
  constexpr double kTol = 1e-4;
  const double tau = PipelineConfig{}.tau;
  const double alpha = PipelineConfig{}.alpha;
  double worst = 0.0;
  int checked = 0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    Rng rng(static_cast<std::uint64_t>(1000 + seed));
    EncoderParams params = EncoderParams::init({16, 32, 32, 32}, static_cast<std::uint64_t>(seed));
    for (std::size_t l = 0; l < params.num_layers(); ++l) params.tensors[2 * l + 1] = gaussian(rng, 1, params.tensors[2 * l + 1].cols(), 0.1);
    // 4 groups of an original plus 2 synthetics over 5 pseudo identities.
    const BatchLayout layout{3, {0, 2, 2, 4}};
    const Matrix inputs = gaussian(rng, static_cast<Eigen::Index>(layout.num_rows()), 16);
    DualMemory mem;
    mem.average = gaussian(rng, 5, 32).rowwise().normalized();
    mem.hardest = gaussian(rng, 5, 32).rowwise().normalized();
    const ContrastCandidates cands = make_candidates(mem, SamplingMode::Both);

    Tape tape;
    const TapedEncoder enc = bind(tape, params);
    const Var feats = encode(enc, inputs);
    const Var loss = total_loss(info_nce(feats, layout, cands, tau), self_identity_loss(feats, layout), alpha);
    const Gradients grads = tape.backward(loss);

    std::vector<int> row_labels;
    for (std::size_t r = 0; r < layout.num_rows(); ++r) row_labels.push_back(layout.row_label(r));
    auto f = [&] {
      return reference_loss(params.tensors, inputs, cands.entries, cands.owners, row_labels, layout.group_size, tau,
                            alpha);
    };
    if (std::abs(static_cast<double>(f()) - loss.value()(0, 0)) > 1e-12) {
      return {false, "forward mismatch against reference at seed " + std::to_string(seed)};
    }
    for (int k = 0; k < kCoordsPerSeed; ++k) {
      // Uniform over all scalars of all tensors.
      std::size_t t = 0;
      std::uniform_int_distribution<std::size_t> pick_scalar(0, params.num_scalars() - 1);
      std::size_t flat = pick_scalar(rng);
      for (t = 0; flat >= static_cast<std::size_t>(params.tensors[t].size()); ++t) {
        flat -= static_cast<std::size_t>(params.tensors[t].size());
      }
      double& x = params.tensors[t].data()[flat];
      const double saved = x;
      x = saved + kStep;
      const long double up = f();
      x = saved - kStep;
      const long double down = f();
      x = saved;
      const double numeric = static_cast<double>((up - down) / (2.0L * kStep));
      const double analytic = grads[enc.tensors[t]].data()[flat];
      const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
      ++checked;
    }
  }
  return {worst <= kTol, std::to_string(checked) + " coordinates over " + std::to_string(kSeeds) +
                             " seeds, max rel err " + sci(worst) + " (tol " + sci(kTol) + ")"};
}

// ---------------------------------------------------------------- criterion 2

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, int> fwd, back;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    auto [f, fi] = fwd.try_emplace(a[i], b[i]);
    auto [r, ri] = back.try_emplace(b[i], a[i]);
    if (f->second != b[i] || r->second != a[i]) return false;
  }
  return true;
}

Outcome criterion_dbscan() {
  Rng rng(2);
  const double eps_values[] = {0.2, 0.4, 0.6};
  const int m_values[] = {2, 4};
  int agree = 0, total = 0, clusters_seen = 0, noise_seen = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const double eps = eps_values[inst % 3];
    const int m = m_values[(inst / 3) % 2];
    std::uniform_int_distribution<int> size(1, 500);
    const int n = inst == 0 ? 500 : size(rng);
    const int d = 4 + inst % 5;
    std::uniform_int_distribution<int> ncentres(1, 12);
    const int centres = ncentres(rng);
    const Matrix c = gaussian(rng, centres, d).rowwise().normalized();
    std::uniform_real_distribution<double> spread(0.05, 0.6);
    const double s = spread(rng);
    std::vector<Vector> pts;
    Matrix own(n, n);
    for (int i = 0; i < n; ++i) {
      const Vector dir = gaussian(rng, d, 1).col(0);
      Vector p = i % 4 == 0 ? dir : Vector(c.row(i % centres).transpose() + s * dir / std::sqrt(static_cast<double>(d)));
      pts.push_back(p.normalized());
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) own(i, j) = oracle::cosine_distance(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
    const PseudoLabeling got = dbscan(pts, eps, m);
    const std::vector<int> want = oracle::dbscan(own, eps, m);
    agree += same_partition(got.labels, want) ? 1 : 0;
    ++total;
    clusters_seen += got.num_clusters;
    noise_seen += static_cast<int>(got.num_noise());
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " instances agree (" +
                              std::to_string(clusters_seen) + " clusters, " + std::to_string(noise_seen) +
                              " noise points in total)"};
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion_metrics() {
  Rng rng(3);
  const std::vector<int> ranks = {1, 5, 10, 20};
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    std::uniform_int_distribution<int> qn(1, 200), gn(1, 500);
    const int nq = inst == 0 ? 200 : qn(rng);
    const int ng = inst == 0 ? 500 : gn(rng);
    const bool ties = inst % 3 == 0;
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::uniform_int_distribution<int> coarse(0, 6), flag(0, 9);
    std::uniform_int_distribution<int> pick(0, ng - 1);
    Matrix d(nq, ng);
    MatchMatrix flags(static_cast<std::size_t>(nq), static_cast<std::size_t>(ng));
    for (int q = 0; q < nq; ++q) {
      for (int g = 0; g < ng; ++g) {
        d(q, g) = ties ? coarse(rng) / 3.0 : u(rng);
        const int r = flag(rng);
        flags(static_cast<std::size_t>(q), static_cast<std::size_t>(g)) =
            r == 0 ? MatchFlag::Match : (r == 1 ? MatchFlag::Ignore : MatchFlag::NonMatch);
      }
      flags(static_cast<std::size_t>(q), static_cast<std::size_t>(pick(rng))) = MatchFlag::Match;
    }
    std::vector<double> hits(ranks.size(), 0.0);
    double ap = 0.0;
    for (int q = 0; q < nq; ++q) {
      std::vector<double> dist(static_cast<std::size_t>(ng));
      std::vector<int> fl(static_cast<std::size_t>(ng));
      for (int g = 0; g < ng; ++g) {
        dist[static_cast<std::size_t>(g)] = d(q, g);
        fl[static_cast<std::size_t>(g)] = static_cast<int>(flags(static_cast<std::size_t>(q), static_cast<std::size_t>(g)));
      }
      const auto ranked = oracle::ranked_flags(dist, fl);
      for (std::size_t k = 0; k < ranks.size(); ++k) hits[k] += oracle::hit_at(ranked, ranks[k]) ? 1.0 : 0.0;
      ap += oracle::average_precision(ranked);
    }
    const auto acc = cmc(d, flags, ranks);
    for (std::size_t k = 0; k < ranks.size(); ++k) worst = std::max(worst, std::abs(acc[k] - hits[k] / nq));
    worst = std::max(worst, std::abs(mean_ap(d, flags) - ap / nq));
  }
  return {worst <= 1e-12, "100 instances up to 200x500, max abs diff " + sci(worst) + " (tol 1e-12)"};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_memory() {
  Rng rng(4);
  double frozen_drift = 0.0, replace_err = 0.0;
  int hardest_agree = 0;
  const int batches = 1000;
  for (int t = 0; t < batches; ++t) {
    const int n = 6, dim = 16, s = 4, k = 2;
    DualMemory mem;
    mem.average = gaussian(rng, n, dim).rowwise().normalized();
    mem.hardest = gaussian(rng, n, dim).rowwise().normalized();
    std::vector<Vector> batch;
    const Matrix b = gaussian(rng, (s + 1) * k, dim).rowwise().normalized();
    for (Eigen::Index r = 0; r < b.rows(); ++r) batch.push_back(b.row(r).transpose());
    const int cluster = t % n;

    // Exhaustive enumeration of KL(softmax f ‖ softmax entry).
    const Vector entry = mem.hardest_of(cluster);
    std::size_t best = 0;
    double best_kl = -1.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double kl = oracle::feature_kl(batch[i], entry);
      if (kl > best_kl) {
        best_kl = kl;
        best = i;
      }
    }
    hardest_agree += select_hardest(entry, batch) == best ? 1 : 0;

    DualMemory frozen = mem;
    frozen.momentum = 1.0;
    update_hard(frozen, cluster, batch);
    update_average(frozen, cluster, batch, s, k);
    frozen_drift = std::max({frozen_drift, (frozen.average - mem.average).cwiseAbs().maxCoeff(),
                             (frozen.hardest - mem.hardest).cwiseAbs().maxCoeff()});

    DualMemory replaced = mem;
    replaced.momentum = 0.0;
    update_hard(replaced, cluster, batch);
    update_average(replaced, cluster, batch, s, k);
    // With m = 0 the entry becomes the (renormalized) candidate itself.
    Vector mean = Vector::Zero(dim);
    for (const Vector& f : batch) mean += f;
    mean /= static_cast<double>(batch.size());
    const Vector hard = batch[best] / batch[best].norm();
    replace_err = std::max({replace_err, (replaced.hardest_of(cluster) - hard).cwiseAbs().maxCoeff(),
                            (replaced.average_of(cluster) - mean / mean.norm()).cwiseAbs().maxCoeff()});
  }
  const bool pass = frozen_drift <= 1e-12 && replace_err == 0.0 && hardest_agree == batches;
  return {pass, "m=1 drift " + sci(frozen_drift) + ", m=0 replacement err " + sci(replace_err) + ", hardest " +
                    std::to_string(hardest_agree) + "/" + std::to_string(batches) + " match enumeration"};
}

// ------------------------------------------------------------ criteria 5 to 9

enum class Variant { Full, Baseline, AugOnly, AugSelf, NoSelf, SampleNone, SampleAverage, SampleHardest };

std::string name_of(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::Baseline: return "baseline";
    case Variant::AugOnly: return "C_a";
    case Variant::AugSelf: return "C_a+C_i";
    case Variant::NoSelf: return "alpha=0";
    case Variant::SampleNone: return "none";
    case Variant::SampleAverage: return "average";
    case Variant::SampleHardest: return "hardest";
  }
  return "?";
}

constexpr int kBenchmarkEpochs = 40;

PipelineConfig config_for(Variant v, std::uint64_t seed) {
  PipelineConfig c;
  c.max_epochs = kBenchmarkEpochs;
  c.init_seed = seed * 7 + 1;
  c.sampling_seed = seed * 13 + 5;
  switch (v) {
    case Variant::Full: break;
    case Variant::Baseline:
      c.use_augmentation = false;
      c.use_self_identity = false;
      c.sampling_mode = SamplingMode::None;
      break;
    case Variant::AugOnly:
      c.use_self_identity = false;
      c.sampling_mode = SamplingMode::None;
      break;
    case Variant::AugSelf:
    case Variant::SampleNone: c.sampling_mode = SamplingMode::None; break;
    case Variant::NoSelf: c.alpha = 0.0; break;
    case Variant::SampleAverage: c.sampling_mode = SamplingMode::Average; break;
    case Variant::SampleHardest: c.sampling_mode = SamplingMode::Hardest; break;
  }
  return c;
}

WorldConfig world_for(std::uint64_t seed) {
  WorldConfig w;
  w.seed = seed;
  return w;
}

struct RunResult {
  double rank1 = 0.0;
  double mean_ap = 0.0;
  double sync_distance = 0.0;
  int aborted_epochs = 0;
  double seconds = 0.0;
  TrainingResult training;
};

class BenchmarkRuns {
 public:
  const RunResult& get(Variant v, std::uint64_t seed) {
    // Variants with identical configs share one run.
    if (v == Variant::SampleNone) v = Variant::AugSelf;
    const auto key = std::make_pair(static_cast<int>(v), seed);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, run(v, seed)).first->second;
  }

  static RunResult run(Variant v, std::uint64_t seed) {
    const auto t0 = Clock::now();
    const SyntheticWorld world = SyntheticWorld::generate(world_for(seed));
    RunResult r;
    r.training = run_training(config_for(v, seed), world);
    r.seconds = seconds_since(t0);
    const Metrics m = evaluate_encoder(r.training.checkpoint.params, world.samples(), EvalProtocol{});
    r.rank1 = m.rank(1);
    r.mean_ap = m.mean_ap;
    r.sync_distance = mean_sync_group_distance(r.training.checkpoint.params, world.subset(Split::Query), world,
                                               world.templates());
    for (const EpochReport& e : r.training.reports) r.aborted_epochs += e.aborted.empty() ? 0 : 1;
    std::fprintf(stderr, "  [%s seed %llu] rank1 %.4f mAP %.4f sync %.4f aborted %d (%.1fs)\n", name_of(v).c_str(),
                 static_cast<unsigned long long>(seed), r.rank1, r.mean_ap, r.sync_distance, r.aborted_epochs,
                 r.seconds);
    return r;
  }

  double mean(Variant v, int seeds, double RunResult::*field) {
    double s = 0.0;
    for (int k = 1; k <= seeds; ++k) s += get(v, static_cast<std::uint64_t>(k)).*field;
    return s / seeds;
  }

 private:
  std::map<std::pair<int, std::uint64_t>, RunResult> cache_;
};

Outcome criterion_benchmark(BenchmarkRuns& runs) {
  double seconds = 0.0;
  for (int k = 1; k <= 3; ++k) seconds += runs.get(Variant::Full, static_cast<std::uint64_t>(k)).seconds;
  const double r1 = runs.mean(Variant::Full, 3, &RunResult::rank1);
  const double map = runs.mean(Variant::Full, 3, &RunResult::mean_ap);
  const bool pass = r1 >= 0.85 && map >= 0.70 && seconds <= 300.0;
  return {pass, "mean over 3 seeds rank-1 " + fmt(r1) + " (>= 0.85), mAP " + fmt(map) + " (>= 0.70), " +
                    fmt(seconds, 1) + " s for 3 runs (<= 300)"};
}

Outcome criterion_ablation(BenchmarkRuns& runs) {
  const double full = runs.mean(Variant::Full, 3, &RunResult::rank1);
  const double base = runs.mean(Variant::Baseline, 3, &RunResult::rank1);
  const double aug = runs.mean(Variant::AugOnly, 3, &RunResult::rank1);
  const double aug_self = runs.mean(Variant::AugSelf, 3, &RunResult::rank1);
  const double no_self = runs.mean(Variant::NoSelf, 3, &RunResult::rank1);
  const bool gap = full - base >= 0.10;
  const bool self_helps = aug_self - aug > 0.0;
  return {gap && self_helps, "full " + fmt(full) + " vs baseline " + fmt(base) + " (gap " + fmt(full - base) +
                                 ", need >= 0.10); C_a+C_i " + fmt(aug_self) + " vs C_a " + fmt(aug) + " (margin " +
                                 fmt(aug_self - aug) + ", need > 0); for reference with both memory banks, alpha=0.3 " +
                                 fmt(full) + " vs alpha=0 " + fmt(no_self)};
}

Outcome criterion_sampling(BenchmarkRuns& runs) {
  const std::vector<std::pair<std::string, Variant>> modes = {{"none", Variant::SampleNone},
                                                              {"average", Variant::SampleAverage},
                                                              {"hardest", Variant::SampleHardest},
                                                              {"both", Variant::Full}};
  std::string detail;
  double both = 0.0, best_other = -1.0;
  for (const auto& [label, v] : modes) {
    const double r1 = runs.mean(v, 5, &RunResult::rank1);
    detail += (detail.empty() ? "" : ", ") + label + " " + fmt(r1);
    if (v == Variant::Full) {
      both = r1;
    } else {
      best_other = std::max(best_other, r1);
    }
  }
  return {both > best_other, "mean rank-1 over 5 seeds: " + detail};
}

Outcome criterion_self_identity(BenchmarkRuns& runs) {
  const double with = runs.mean(Variant::Full, 3, &RunResult::sync_distance);
  const double without = runs.mean(Variant::NoSelf, 3, &RunResult::sync_distance);
  return {with < without, "mean SyncGroup distance alpha=0.3 " + fmt(with, 5) + " vs alpha=0 " + fmt(without, 5)};
}

std::string serialized(const Checkpoint& c) {
  const auto path = std::filesystem::temp_directory_path() / "ccreid_acceptance_ckpt.bin";
  write_checkpoint(path, c);
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::filesystem::remove(path);
  return bytes;
}

Outcome criterion_determinism(BenchmarkRuns& runs) {
  const RunResult& first = runs.get(Variant::Full, 1);
  const RunResult second = BenchmarkRuns::run(Variant::Full, 1);
  const bool same_ckpt = serialized(first.training.checkpoint) == serialized(second.training.checkpoint);
  bool same_reports = first.training.reports.size() == second.training.reports.size();
  for (std::size_t i = 0; same_reports && i < first.training.reports.size(); ++i) {
    same_reports = first.training.reports[i].same_outcome(second.training.reports[i]);
  }
  return {same_ckpt && same_reports, std::string("checkpoints ") + (same_ckpt ? "identical" : "differ") +
                                         ", epoch reports " + (same_reports ? "identical" : "differ") + " over " +
                                         std::to_string(first.training.reports.size()) + " epochs"};
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expect_fail;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only") {
      only = parse_list(argv[i + 1]);
    } else if (flag == "--expect-fail") {
      expect_fail = parse_list(argv[i + 1]);
    } else {
      std::cerr << "unknown flag " << flag << '\n';
      return 2;
    }
  }

  BenchmarkRuns runs;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient check vs finite differences", criterion_gradients},
      {"dbscan vs brute-force oracle", criterion_dbscan},
      {"cmc/mAP vs sorted-list oracle", criterion_metrics},
      {"memory update algebra", criterion_memory},
      {"end-to-end synthetic benchmark", [&] { return criterion_benchmark(runs); }},
      {"ablation direction", [&] { return criterion_ablation(runs); }},
      {"sampling ablation direction", [&] { return criterion_sampling(runs); }},
      {"self-identity tightens sync groups", [&] { return criterion_self_identity(runs); }},
      {"determinism", [&] { return criterion_determinism(runs); }},
  };
  const double limits[] = {30, 30, 30, 10, 0, 0, 0, 0, 0};

  bool ok = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    if (limits[i] > 0 && secs > limits[i]) {
      o.pass = false;
      o.detail += "; runtime " + fmt(secs, 1) + " s exceeds " + fmt(limits[i], 0) + " s";
    }
    const bool expected_red = expect_fail.count(id) > 0;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << criteria[i].first << ": " << o.detail << " ("
              << fmt(secs, 1) << " s)" << (expected_red ? " [known shortfall]" : "") << std::endl;
    if (o.pass == expected_red) ok = false;
  }
  return ok ? 0 : 1;
}
