#include "ncs/energy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ncs {

EnergyQueue::EnergyQueue(double theta, double tau, double initial)
    : theta_(theta), tau_(tau), level_(initial) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("EnergyQueue: theta must be > 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("EnergyQueue: tau must be > 0");
  if (!(initial >= 0.0 && initial <= theta)) {
    throw DomainError("EnergyQueue: initial level must lie in [0, theta]");
  }
}

void EnergyQueue::SpendAndHarvest(double spend, double alpha) {
  if (!(spend >= 0.0) || !(alpha >= 0.0)) {
    throw DomainError("EnergyQueue: spend and alpha must be non-negative");
  }
  if (spend > level_) ++overspend_count_;
  level_ = std::min(std::max(level_ - spend, 0.0) + alpha, theta_);
}

double PrecoderEnergy(const MatrixXcd& F, double M, double tau) {
  return M * M * F.squaredNorm() * tau;
}

bool CheckFeasible(double E, const MatrixXcd& F, double M, double tau) {
  return PrecoderEnergy(F, M, tau) <= E + 1e-9;
}

ArrivalModel::ArrivalModel(Kind kind, double mean, std::vector<double> values)
    : kind_(kind), mean_(mean), values_(std::move(values)) {}

ArrivalModel ArrivalModel::Poisson(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw DomainError("ArrivalModel: mean must be > 0");
  return ArrivalModel(Kind::kPoisson, mean, {});
}

ArrivalModel ArrivalModel::Deterministic(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw DomainError("ArrivalModel: value must be >= 0");
  }
  return ArrivalModel(Kind::kDeterministic, value, {});
}

ArrivalModel ArrivalModel::Empirical(std::vector<double> values) {
  if (values.empty()) throw DomainError("ArrivalModel: empty support");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("ArrivalModel: negative support");
  }
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return ArrivalModel(Kind::kEmpirical, mean, std::move(values));
}

double ArrivalModel::Sample(Rng& rng) const {
  switch (kind_) {
    case Kind::kPoisson: {
      std::poisson_distribution<long long> dist(mean_);
      return static_cast<double>(dist(rng));
    }
    case Kind::kDeterministic:
      return mean_;
    case Kind::kEmpirical: {
      std::uniform_int_distribution<std::size_t> dist(0, values_.size() - 1);
      return values_[dist(rng)];
    }
  }
  return 0.0;
}

double ArrivalModel::ZeroProbability() const {
  switch (kind_) {
    case Kind::kPoisson:
      return std::exp(-mean_);
    case Kind::kDeterministic:
      return mean_ == 0.0 ? 1.0 : 0.0;
    case Kind::kEmpirical: {
      const auto zeros = std::count(values_.begin(), values_.end(), 0.0);
      return static_cast<double>(zeros) / static_cast<double>(values_.size());
    }
  }
  return 0.0;
}

double ArrivalModel::InverseMeanPositive() const {
  switch (kind_) {
    case Kind::kPoisson: {
      // Sum_{k>=1} p(k)/k with p(k) built up recursively in log space.
      const double p0 = std::exp(-mean_);
      double log_p = -mean_;
      double sum = 0.0;
      const long long stop = static_cast<long long>(mean_ + 40.0 * std::sqrt(mean_) + 50.0);
      for (long long k = 1; k <= stop; ++k) {
        log_p += std::log(mean_) - std::log(static_cast<double>(k));
        sum += std::exp(log_p) / static_cast<double>(k);
      }
      return sum / (1.0 - p0);
    }
    case Kind::kDeterministic:
      if (mean_ == 0.0) return std::numeric_limits<double>::infinity();
      return 1.0 / mean_;
    case Kind::kEmpirical: {
      double sum = 0.0;
      std::size_t n = 0;
      for (double v : values_) {
        if (v > 0.0) {
          sum += 1.0 / v;
          ++n;
        }
      }
      if (n == 0) return std::numeric_limits<double>::infinity();
      return sum / static_cast<double>(n);
    }
  }
  return 0.0;
}

InverseMeanEstimate EstimateInverseMean(const ArrivalModel& model, Rng& rng,
                                        std::size_t n_draws) {
  InverseMeanEstimate out{0.0, 0, n_draws};
  double sum = 0.0;
  for (std::size_t i = 0; i < n_draws; ++i) {
    const double a = model.Sample(rng);
    if (a > 0.0) {
      sum += 1.0 / a;
    } else {
      ++out.zero_draws;
    }
  }
  const std::size_t positive = n_draws - out.zero_draws;
  out.inverse_mean =
      positive == 0 ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(positive);
  return out;
}

}  // namespace ncs
