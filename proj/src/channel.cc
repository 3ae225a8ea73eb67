#include "ncs/channel.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace ncs {

namespace {
constexpr double kRankFloor = 1e-12;
}  // namespace

ChannelDraw ChannelDraw::FromMatrix(MatrixXcd H, int k) {
  if (k < 1 || k > std::min(H.rows(), H.cols())) {
    throw DomainError("ChannelDraw: K must satisfy 1 <= K <= min(Nc, Ns)");
  }
  ChannelDraw draw;
  draw.svd = Svd(H);
  draw.H = std::move(H);
  draw.pi_k = draw.svd.singular_values().head(k);
  return draw;
}

bool ChannelDraw::rank_deficient() const {
  return pi_k.size() > 0 && pi_k.minCoeff() < kRankFloor;
}

VectorXcd SampleComplexNoise(Rng& rng, int n) {
  const double s = std::sqrt(0.5);
  VectorXcd z(n);
  for (int i = 0; i < n; ++i) {
    const double re = s * StandardNormal(rng);
    const double im = s * StandardNormal(rng);
    z(i) = {re, im};
  }
  return z;
}

ChannelDraw SampleChannel(Rng& rng, int n_c, int n_s, int k) {
  if (k > std::min(n_c, n_s)) throw DomainError("SampleChannel: K > min(Nc, Ns)");
  const double s = std::sqrt(0.5);
  MatrixXcd H(n_c, n_s);
  // Entries are drawn in row-major order.
  for (int r = 0; r < n_c; ++r) {
    for (int c = 0; c < n_s; ++c) {
      const double re = s * StandardNormal(rng);
      const double im = s * StandardNormal(rng);
      H(r, c) = {re, im};
    }
  }
  return ChannelDraw::FromMatrix(std::move(H), k);
}

VectorXcd ReceiveNoiseless(const ChannelDraw& draw, const MatrixXcd& F,
                           const VectorXd& q) {
  if (F.rows() != draw.H.cols() || F.cols() != q.size()) {
    throw DomainError("Receive: dimension mismatch");
  }
  return draw.H * (F * q.cast<std::complex<double>>());
}

VectorXcd Receive(const ChannelDraw& draw, const MatrixXcd& F, const VectorXd& q,
                  Rng& rng) {
  VectorXcd y = ReceiveNoiseless(draw, F, q);
  y += SampleComplexNoise(rng, static_cast<int>(y.size()));
  return y;
}

void PiTildeStats::AddDraw(const VectorXd& pi_k) {
  if (pi_k.size() == 0 || pi_k.minCoeff() < kRankFloor) {
    ++excluded_;
    return;
  }
  const double t = pi_k.cwiseInverse().sum();
  for (Eigen::Index i = 0; i < pi_k.size(); ++i) samples_.push_back(pi_k(i) / t);
  finalized_ = false;
}

void PiTildeStats::Finalize() {
  std::sort(samples_.begin(), samples_.end());
  suffix_inverse_sum_.assign(samples_.size() + 1, 0.0);
  for (std::size_t i = samples_.size(); i-- > 0;) {
    suffix_inverse_sum_[i] = suffix_inverse_sum_[i + 1] + 1.0 / samples_[i];
  }
  finalized_ = true;
}

double PiTildeStats::Cdf(double xi) const {
  if (!finalized_ || samples_.empty()) throw DomainError("PiTildeStats: not finalized or empty");
  const auto it = std::lower_bound(samples_.begin(), samples_.end(), xi);
  return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

double PiTildeStats::ConditionalInverseMean(double xi) const {
  if (!finalized_ || samples_.empty()) throw DomainError("PiTildeStats: not finalized or empty");
  const auto it = std::lower_bound(samples_.begin(), samples_.end(), xi);
  const std::size_t first = static_cast<std::size_t>(it - samples_.begin());
  const std::size_t count = samples_.size() - first;
  if (count == 0) return std::numeric_limits<double>::infinity();
  return suffix_inverse_sum_[first] / static_cast<double>(count);
}

double PiTildeStats::Quantile(double p) const {
  if (!finalized_ || samples_.empty()) throw DomainError("PiTildeStats: not finalized or empty");
  p = std::clamp(p, 0.0, 1.0);
  const std::size_t idx = std::min(
      samples_.size() - 1,
      static_cast<std::size_t>(std::floor(p * static_cast<double>(samples_.size() - 1) + 0.5)));
  return samples_[idx];
}

void PiTildeStats::WriteCsv(std::ostream& os) const {
  os << "pi_tilde\n";
  char buf[64];
  for (double s : samples_) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", s);
    os << buf;
  }
}

PiTildeStats EstimatePiTildeStats(Rng& rng, int n_c, int n_s, int k,
                                  std::size_t n_draws) {
  PiTildeStats stats;
  for (std::size_t i = 0; i < n_draws; ++i) {
    stats.AddDraw(SampleChannel(rng, n_c, n_s, k).pi_k);
  }
  stats.Finalize();
  return stats;
}

}  // namespace ncs
