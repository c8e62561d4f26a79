#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ccreid/clustering.hpp"
#include "ccreid/contrast.hpp"
#include "ccreid/encoder.hpp"
#include "ccreid/evaluation.hpp"
#include "ccreid/tape.hpp"

namespace {

using namespace ccreid;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

std::vector<Vector> unit_rows(const Matrix& m) {
  std::vector<Vector> out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(m.row(r).transpose().normalized());
  return out;
}

void BM_Dbscan(benchmark::State& state) {
  const auto pts = unit_rows(random_matrix(state.range(0), 64, 1));
  for (auto _ : state) benchmark::DoNotOptimize(dbscan(pts, 0.4, 4));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dbscan)->RangeMultiplier(2)->Range(128, 1024)->Complexity(benchmark::oNSquared);

void BM_EncodeBatch(benchmark::State& state) {
  const EncoderParams params = EncoderParams::init({64, 64, 64}, 1);
  const Matrix inputs = random_matrix(state.range(0), 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(encode_batch(params, inputs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncodeBatch)->Arg(32)->Arg(160)->Arg(1000);

// One forward and backward pass of the training loss on a P=8, K=4, S=4 batch.
void BM_TrainingStep(benchmark::State& state) {
  const EncoderParams params = EncoderParams::init({64, 64, 64}, 1);
  std::vector<int> labels;
  for (int p = 0; p < 8; ++p)
    for (int k = 0; k < 4; ++k) labels.push_back(p);
  const BatchLayout layout{5, labels};
  const Matrix inputs = random_matrix(static_cast<Eigen::Index>(layout.num_rows()), 64, 3);
  DualMemory mem;
  mem.average = random_matrix(state.range(0), 64, 4).rowwise().normalized();
  mem.hardest = random_matrix(state.range(0), 64, 5).rowwise().normalized();
  const ContrastCandidates cands = make_candidates(mem, SamplingMode::Both);
  for (auto _ : state) {
    Tape tape;
    const TapedEncoder enc = bind(tape, params);
    const Var feats = encode(enc, inputs);
    const Var loss = total_loss(info_nce(feats, layout, cands, 0.1), self_identity_loss(feats, layout), 0.3);
    benchmark::DoNotOptimize(tape.backward(loss));
  }
}
BENCHMARK(BM_TrainingStep)->Arg(25)->Arg(100);

void BM_MeanAp(benchmark::State& state) {
  const auto nq = state.range(0);
  const Eigen::Index ng = 500;
  const Matrix d = random_matrix(nq, ng, 6).cwiseAbs();
  MatchMatrix flags(static_cast<std::size_t>(nq), static_cast<std::size_t>(ng));
  for (Eigen::Index q = 0; q < nq; ++q) flags(static_cast<std::size_t>(q), static_cast<std::size_t>(q % ng)) = MatchFlag::Match;
  for (auto _ : state) benchmark::DoNotOptimize(mean_ap(d, flags));
}
BENCHMARK(BM_MeanAp)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
