#include "metaadapt/envs/crawler.hpp"

#include <stdexcept>

namespace metaadapt::envs {

double effectiveness(int episode_index, int total) {
  if (total < 2) throw std::invalid_argument("effectiveness: total < 2");
  if (episode_index < 0 || episode_index >= total)
    throw std::out_of_range("effectiveness: episode index outside chain");
  return 1.0 - static_cast<double>(episode_index) /
                   static_cast<double>(total - 1);
}

Eigen::MatrixXd crawler_mixing(const CrawlerConfig& cfg) {
  const int n = cfg.n_actuators;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, n);
  if (cfg.identity_mixing) {
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    return m;
  }
  Rng rng = Rng::stream(cfg.mixing_seed, "crawler-mixing");
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = rng.normal();
  // Gram-Schmidt on the two rows.
  m.row(0).normalize();
  m.row(1) -= m.row(0) * m.row(0).dot(m.row(1));
  m.row(1).normalize();
  return m;
}

CrawlerTask::CrawlerTask(const CrawlerConfig& cfg,
                         std::array<int, 2> weak_pair, int episode_index)
    : cfg_(cfg),
      weak_pair_(weak_pair),
      episode_index_(episode_index),
      effectiveness_(effectiveness(episode_index, cfg.episodes_per_chain)),
      mixing_(crawler_mixing(cfg)) {
  for (int k : weak_pair_)
    if (k < 0 || k >= cfg_.n_actuators)
      throw std::out_of_range("CrawlerTask: actuator index out of range");
  mask_ = Vec::Ones(cfg_.n_actuators);
  mask_[weak_pair_[0]] = effectiveness_;
  mask_[weak_pair_[1]] = effectiveness_;
  last_action_ = Vec::Zero(cfg_.n_actuators);
}

Vec CrawlerTask::reset(Rng&) {
  position_.setZero();
  velocity_.setZero();
  last_action_.setZero();
  t_ = 0;
  return Vec::Zero(obs_dim());
}

Task::Step CrawlerTask::step(const Vec& action) {
  Vec a = action.cwiseMax(-1.0).cwiseMin(1.0);
  velocity_ = mixing_ * mask_.cwiseProduct(a);
  position_ += velocity_;
  last_action_ = a;
  ++t_;

  Step s;
  s.reward = velocity_.dot(cfg_.target) - cfg_.control_cost * a.squaredNorm();
  s.done = t_ >= cfg_.horizon;
  s.obs = Vec(obs_dim());
  s.obs.head(2) = velocity_;
  s.obs.tail(cfg_.n_actuators) = last_action_;
  return s;
}

std::string CrawlerTask::id() const {
  return "crawler-p" + std::to_string(weak_pair_[0]) + "-" +
         std::to_string(weak_pair_[1]) + "-e" + std::to_string(episode_index_);
}

}  // namespace metaadapt::envs
