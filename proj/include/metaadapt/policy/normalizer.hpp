#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace metaadapt::policy {

using Vec = Eigen::VectorXd;

// Running per-dimension normalizer with Welford updates. normalize() is pure;
// callers decide when stats move (training rollouts update, evaluation keeps
// them frozen). Before any update the output is simply the clipped input.
class ObsNormalizer {
 public:
  ObsNormalizer() = default;
  explicit ObsNormalizer(int dim, double clip = 5.0)
      : clip_(clip), mean_(Vec::Zero(dim)), m2_(Vec::Zero(dim)) {}

  void update(const Vec& raw) {
    ++count_;
    Vec delta = raw - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta.cwiseProduct(raw - mean_);
  }

  Vec normalize(const Vec& raw) const {
    Vec z;
    if (count_ == 0) {
      z = raw;
    } else {
      Vec sd = (variance().array() + kEps).sqrt();
      z = (raw - mean_).cwiseQuotient(sd);
    }
    return z.cwiseMax(-clip_).cwiseMin(clip_);
  }

  Vec variance() const {
    if (count_ == 0) return Vec::Ones(mean_.size());
    return m2_ / static_cast<double>(count_);
  }

  const Vec& mean() const { return mean_; }
  int64_t count() const { return count_; }
  double clip() const { return clip_; }
  int dim() const { return static_cast<int>(mean_.size()); }

  // Checkpoint plumbing.
  const Vec& m2() const { return m2_; }
  void restore(Vec mean, Vec m2, int64_t count, double clip) {
    mean_ = std::move(mean);
    m2_ = std::move(m2);
    count_ = count;
    clip_ = clip;
  }

 private:
  static constexpr double kEps = 1e-8;
  double clip_ = 5.0;
  Vec mean_;
  Vec m2_;
  int64_t count_ = 0;
};

}  // namespace metaadapt::policy
