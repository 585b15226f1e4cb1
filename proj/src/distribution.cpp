#include "covshift/distribution.hpp"

#include <cmath>
#include <stdexcept>

#include "covshift/rng.hpp"

namespace covshift {

UniformBox::UniformBox(Eigen::VectorXd lo_, Eigen::VectorXd hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size() || lo.size() < 1)
    throw std::invalid_argument("UniformBox: bounds must share a positive dimension");
  if (((hi - lo).array() <= 0.0).any())
    throw std::invalid_argument("UniformBox: hi must exceed lo coordinatewise");
}

double UniformBox::log_density(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("UniformBox: dimension mismatch");
  for (Eigen::Index i = 0; i < dim(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return -std::numeric_limits<double>::infinity();
  return -(hi - lo).array().log().sum();
}

Eigen::MatrixXd UniformBox::sample(int n, std::uint64_t seed) const {
  Rng rng(seed);
  Eigen::MatrixXd out(dim(), n);
  for (int j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < dim(); ++i) out(i, j) = lo[i] + (hi[i] - lo[i]) * rng.uniform();
  return out;
}

RkhsReweightedModel::RkhsReweightedModel(Base base, KernelSpec kernel, Eigen::MatrixXd centers,
                                         Eigen::VectorXd alphas, double log_ratio_bound)
    : base_(std::make_shared<const Base>(std::move(base))),
      kernel_(kernel),
      centers_(std::move(centers)),
      alphas_(std::move(alphas)),
      log_ratio_bound_(log_ratio_bound) {
  if (centers_.cols() != alphas_.size())
    throw std::invalid_argument("RkhsReweightedModel: one coefficient per center required");
  if (!(log_ratio_bound_ >= 0.0))
    throw std::invalid_argument("RkhsReweightedModel: log_ratio_bound must be >= 0");
  const Eigen::Index d = dim();
  if (centers_.cols() > 0 && centers_.rows() != d)
    throw std::invalid_argument("RkhsReweightedModel: center dimension mismatch");
}

Eigen::Index RkhsReweightedModel::dim() const {
  return std::visit([](const auto& b) { return b.dim(); }, *base_);
}

double RkhsReweightedModel::log_ratio(const Eigen::VectorXd& x) const {
  double value = 0.0;
  for (Eigen::Index i = 0; i < alphas_.size(); ++i)
    value += alphas_[i] * kernel_(centers_.col(i), x);
  return value;
}

Eigen::MatrixXd RkhsReweightedModel::sample(int n, std::uint64_t seed) const {
  Eigen::MatrixXd out(dim(), n);
  if (n == 0) return out;

  // Proposals are drawn from the base in blocks; acceptance uses an
  // independent uniform stream so block size never changes the result.
  constexpr int kBlock = 4096;
  constexpr long kWindow = 100000;
  constexpr double kMinRate = 1e-4;

  Rng accept_rng(derive_seed(seed, 0x9c3a));
  const std::uint64_t proposal_root = derive_seed(seed, 0x51b7);

  int filled = 0;
  long proposals_in_window = 0;
  long accepts_in_window = 0;
  std::uint64_t block_index = 0;
  const double log_bound = log_ratio_bound_;

  while (filled < n) {
    const Eigen::MatrixXd proposals = std::visit(
        [&](const auto& b) { return b.sample(kBlock, derive_seed(proposal_root, block_index)); },
        *base_);
    ++block_index;
    for (int j = 0; j < kBlock && filled < n; ++j) {
      const double log_accept = std::min(0.0, -log_ratio(proposals.col(j)) - log_bound);
      ++proposals_in_window;
      if (std::log(std::max(accept_rng.uniform(), 1e-300)) < log_accept) {
        out.col(filled++) = proposals.col(j);
        ++accepts_in_window;
      }
      if (proposals_in_window >= kWindow) {
        if (static_cast<double>(accepts_in_window) < kMinRate * static_cast<double>(proposals_in_window))
          throw std::runtime_error(
              "RkhsReweightedModel::sample: acceptance rate below 1e-4; log_ratio_bound is ill-chosen");
        proposals_in_window = 0;
        accepts_in_window = 0;
      }
    }
  }
  return out;
}

DiscreteAtoms::DiscreteAtoms(Eigen::MatrixXd atoms_, Eigen::VectorXd probs_)
    : atoms(std::move(atoms_)), probs(std::move(probs_)) {
  if (atoms.cols() != probs.size() || atoms.cols() < 1)
    throw std::invalid_argument("DiscreteAtoms: one probability per atom required");
  if ((probs.array() < 0.0).any())
    throw std::invalid_argument("DiscreteAtoms: probabilities must be nonnegative");
  if (std::abs(probs.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("DiscreteAtoms: probabilities must sum to 1");
}

Eigen::MatrixXd DiscreteAtoms::sample(int n, std::uint64_t seed) const {
  Rng rng(seed);
  Eigen::MatrixXd out(dim(), n);
  for (int j = 0; j < n; ++j) {
    const double u = rng.uniform();
    double acc = 0.0;
    Eigen::Index pick = probs.size() - 1;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    out.col(j) = atoms.col(pick);
  }
  return out;
}

int DiscreteAtoms::atom_index(const Eigen::VectorXd& x) const {
  for (Eigen::Index i = 0; i < atoms.cols(); ++i)
    if ((atoms.col(i) - x).lpNorm<Eigen::Infinity>() < 1e-12) return static_cast<int>(i);
  return -1;
}

double DiscreteAtoms::log_density(const Eigen::VectorXd& x) const {
  const int i = atom_index(x);
  if (i < 0) return -std::numeric_limits<double>::infinity();
  return std::log(std::max(probs[i], 1e-300));
}

Eigen::Index Distribution::dim() const {
  return std::visit([](const auto& m) { return m.dim(); }, v_);
}

Eigen::MatrixXd Distribution::sample(int n, std::uint64_t seed) const {
  return std::visit([&](const auto& m) { return m.sample(n, seed); }, v_);
}

bool Distribution::has_density() const {
  return !std::holds_alternative<RkhsReweightedModel>(v_);
}

double Distribution::log_density(const Eigen::VectorXd& x) const {
  if (const auto* g = std::get_if<GaussianModel>(&v_)) return g->log_density(x);
  if (const auto* u = std::get_if<UniformBox>(&v_)) return u->log_density(x);
  if (const auto* a = std::get_if<DiscreteAtoms>(&v_)) return a->log_density(x);
  throw std::runtime_error("Distribution: density unavailable for RKHS-reweighted models");
}

}  // namespace covshift
