#include "thetanorm/experiments.hpp"

#include <cmath>

namespace thetanorm {

namespace {

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(std::pow(10.0, lo + t * (hi - lo)));
  }
  return out;
}

RegularizerGrid grid(RegularizerKind kind, std::vector<double> lambdas) {
  RegularizerGrid g;
  g.kind = kind;
  g.lambdas = std::move(lambdas);
  return g;
}

}  // namespace

ExperimentSpec preset_lowrank() {
  ExperimentSpec spec;
  spec.data.kind = DatasetKind::SyntheticLowRank;
  spec.data.m = 50;
  spec.data.rank = 5;
  spec.data.noise_sd = 1.0;
  spec.data.sample_amount = 0.2;
  spec.repeats = 20;
  spec.tolerance = 1e-5;
  spec.max_iterations = 2000;

  spec.grids.push_back(grid(RegularizerKind::Trace, logspace(-1, 1.5, 11)));
  auto en = grid(RegularizerKind::ElasticNet, logspace(-1, 1.5, 11));
  en.mus = {0.01, 0.1, 1.0};
  spec.grids.push_back(en);
  auto ks = grid(RegularizerKind::SpectralKSupport, logspace(-3, 0, 13));
  ks.ks = {1, 2, 3, 5, 8};
  spec.grids.push_back(ks);
  auto box = grid(RegularizerKind::SpectralBox, logspace(-3, 0, 13));
  box.ks = {1, 2, 3, 5, 8};
  box.as = {1e-3, 1e-2, 1e-1};
  spec.grids.push_back(box);
  return spec;
}

ExperimentSpec preset_block() {
  ExperimentSpec spec;
  spec.data.kind = DatasetKind::SyntheticBlock;
  spec.data.m = 100;
  spec.data.blocks = 5;
  spec.data.block_size = 20;
  spec.data.levels = {1.0, 10.0};
  spec.data.noise_sd = 1.0;
  spec.data.sample_amount = 0.2;
  spec.repeats = 20;

  auto ks = grid(RegularizerKind::SpectralKSupport, logspace(-3, 0.5, 15));
  ks.ks = {1, 2, 3, 5};
  spec.grids.push_back(ks);
  auto cks = ks;
  cks.kind = RegularizerKind::CenteredKSupport;
  spec.grids.push_back(cks);
  auto box = grid(RegularizerKind::SpectralBox, logspace(-3, 0.5, 15));
  box.ks = {1, 2, 3, 5};
  box.as = {1e-3, 1e-2};
  spec.grids.push_back(box);
  auto ccn = box;
  ccn.kind = RegularizerKind::CenteredCluster;
  spec.grids.push_back(ccn);
  return spec;
}

ExperimentSpec preset_multitask() {
  ExperimentSpec spec;
  spec.data.kind = DatasetKind::Multitask;
  spec.data.train_per_task = 8;
  spec.repeats = 20;

  spec.grids.push_back(grid(RegularizerKind::Trace, logspace(-1, 2, 10)));
  auto ks = grid(RegularizerKind::SpectralKSupport, logspace(-3, 1, 13));
  ks.ks = {1, 2, 3, 5};
  spec.grids.push_back(ks);
  auto cks = ks;
  cks.kind = RegularizerKind::CenteredKSupport;
  spec.grids.push_back(cks);
  auto cn = grid(RegularizerKind::Cluster, logspace(-3, 1, 13));
  cn.ks = {1, 2, 3, 5};
  cn.as = {1e-2, 1e-1};
  spec.grids.push_back(cn);
  auto ccn = cn;
  ccn.kind = RegularizerKind::CenteredCluster;
  spec.grids.push_back(ccn);
  return spec;
}

}  // namespace thetanorm
