#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "ncs/numerics.h"
#include "ncs/random.h"

namespace ncs {

/// One block-fading realization of the Nc x Ns channel, with its SVD and the
/// leading K singular values (the diagonal of Pi_K).
struct ChannelDraw {
  MatrixXcd H;
  SvdResult svd;
  VectorXd pi_k;

  /// Decomposes H. Requires K <= min(Nc, Ns).
  static ChannelDraw FromMatrix(MatrixXcd H, int k);

  int k() const { return static_cast<int>(pi_k.size()); }
  /// First K columns of U (the transmit eigenbeams carrying the streams).
  MatrixXcd leading_beams() const { return svd.U.leftCols(pi_k.size()); }
  /// True if any leading singular value is below 1e-12.
  bool rank_deficient() const;
};

/// Entries i.i.d. CN(0, 1): real and imaginary parts each N(0, 1/2).
ChannelDraw SampleChannel(Rng& rng, int n_c, int n_s, int k);

/// i.i.d. CN(0, 1) vector.
VectorXcd SampleComplexNoise(Rng& rng, int n);

/// y = H F q + z with z ~ CN(0, I_Nc).
VectorXcd Receive(const ChannelDraw& draw, const MatrixXcd& F, const VectorXd& q,
                  Rng& rng);

/// H F q without noise.
VectorXcd ReceiveNoiseless(const ChannelDraw& draw, const MatrixXcd& F,
                           const VectorXd& q);

/// Empirical distribution of the normalized unordered singular value
/// pi~ = pi / Tr(Pi_K^-1). Every draw contributes all K normalized values.
class PiTildeStats {
 public:
  PiTildeStats() = default;

  /// Adds the K normalized values of one draw; draws with a singular value
  /// below 1e-12 are skipped and counted.
  void AddDraw(const VectorXd& pi_k);
  /// Sorts samples; must be called before the accessors.
  void Finalize();

  const std::vector<double>& samples() const { return samples_; }
  std::size_t excluded_draws() const { return excluded_; }
  bool empty() const { return samples_.empty(); }

  /// Pr(pi~ < xi).
  double Cdf(double xi) const;
  /// E[1/pi~ | pi~ >= xi]; +inf when no sample reaches xi.
  double ConditionalInverseMean(double xi) const;
  /// Empirical p-quantile, p in [0, 1].
  double Quantile(double p) const;

  /// One value per line.
  void WriteCsv(std::ostream& os) const;

 private:
  std::vector<double> samples_;
  // suffix_inverse_sum_[i] = sum_{j >= i} 1 / samples_[j] (sorted order)
  std::vector<double> suffix_inverse_sum_;
  std::size_t excluded_ = 0;
  bool finalized_ = false;
};

PiTildeStats EstimatePiTildeStats(Rng& rng, int n_c, int n_s, int k,
                                  std::size_t n_draws);

}  // namespace ncs
