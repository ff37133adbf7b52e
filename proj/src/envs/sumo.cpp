#include "metaadapt/envs/sumo.hpp"

#include <cmath>

namespace metaadapt::envs {

SumoState sumo_reset(const SumoConfig& cfg, Rng& rng) {
  SumoState s;
  const double psi = rng.uniform(0.0, 2.0 * M_PI);
  const Vector2d axis{std::cos(psi), std::sin(psi)};
  for (int i = 0; i < 2; ++i) {
    const double side = i == 0 ? 1.0 : -1.0;
    s.pos[i] = side * cfg.spawn_distance * axis +
               Vector2d{rng.uniform(-cfg.spawn_jitter, cfg.spawn_jitter),
                        rng.uniform(-cfg.spawn_jitter, cfg.spawn_jitter)};
    s.vel[i].setZero();
    s.impulse[i].setZero();
  }
  return s;
}

SumoStepResult sumo_step(SumoState& s, const Vec& action0, const Vec& action1,
                         const SumoConfig& cfg) {
  SumoStepResult out;
  if (s.done) {
    out.done = true;
    out.outcome = s.outcome;
    return out;
  }

  std::array<Vector2d, 2> act;
  act[0] = Vector2d(action0[0], action0[1]).cwiseMax(-1.0).cwiseMin(1.0);
  act[1] = Vector2d(action1[0], action1[1]).cwiseMax(-1.0).cwiseMin(1.0);

  for (int i = 0; i < 2; ++i) {
    const DiskBody& b = cfg.bodies[i];
    s.vel[i] = b.damping * s.vel[i] +
               (b.force_scale / b.mass) * cfg.dt * act[i];
    s.pos[i] += cfg.dt * s.vel[i];
    s.impulse[i].setZero();
  }

  // Disk-disk contact: positional split weighted by inverse mass, then an
  // impulse along the contact normal if the disks are approaching.
  const Vector2d d = s.pos[0] - s.pos[1];
  const double dist = d.norm();
  const double min_dist = 2.0 * cfg.agent_radius;
  if (dist < min_dist) {
    const Vector2d n = dist > 1e-9 ? Vector2d(d / dist) : Vector2d(1.0, 0.0);
    const double w0 = 1.0 / cfg.bodies[0].mass;
    const double w1 = 1.0 / cfg.bodies[1].mass;
    const double overlap = min_dist - dist;
    s.pos[0] += n * overlap * (w0 / (w0 + w1));
    s.pos[1] -= n * overlap * (w1 / (w0 + w1));

    const double approach = (s.vel[0] - s.vel[1]).dot(n);
    if (approach < 0.0) {
      const double j = -(1.0 + cfg.restitution) * approach / (w0 + w1);
      s.vel[0] += j * w0 * n;
      s.vel[1] -= j * w1 * n;
      s.impulse[0] = j * n;
      s.impulse[1] = -j * n;
    }
  }

  ++s.t;
  const bool out0 = s.pos[0].norm() > cfg.ring_radius;
  const bool out1 = s.pos[1].norm() > cfg.ring_radius;
  std::array<double, 2> terminal{0.0, 0.0};
  if (out0 || out1) {
    s.done = true;
    if (out0 && out1) {
      s.outcome = {0, 0};
      terminal = {cfg.draw_reward, cfg.draw_reward};
    } else if (out1) {
      s.outcome = {1, -1};
      terminal = {cfg.win_reward, cfg.loss_reward};
    } else {
      s.outcome = {-1, 1};
      terminal = {cfg.loss_reward, cfg.win_reward};
    }
  } else if (s.t >= cfg.episode_length) {
    s.done = true;
    s.outcome = {0, 0};
    terminal = {cfg.draw_reward, cfg.draw_reward};
  }

  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const Vector2d to_opp = s.pos[j] - s.pos[i];
    const double gap = to_opp.norm();
    const Vector2d dir = gap > 1e-9 ? Vector2d(to_opp / gap) : Vector2d(0, 0);
    const double hit = std::min(s.impulse[j].squaredNorm(),
                                cfg.obs_force_clip);
    out.reward[i] = -cfg.c_center * std::exp(-s.pos[j].norm()) +
                    cfg.c_toward * s.vel[i].dot(dir) + cfg.c_hit * hit -
                    cfg.c_ctrl * act[i].squaredNorm() + terminal[i];
  }
  out.done = s.done;
  out.outcome = s.outcome;
  return out;
}

Vec sumo_charger_action(const SumoState& s, int agent, Rng& rng, double noise,
                        double kp, double kd) {
  const int j = 1 - agent;
  const Vector2d a = kp * (s.pos[j] - s.pos[agent]) - kd * s.vel[agent];
  Vec out(2);
  out << a[0] + noise * rng.normal(), a[1] + noise * rng.normal();
  return out;
}

Vec sumo_observation(const SumoState& s, int agent, const SumoConfig& cfg) {
  const int i = agent;
  const int j = 1 - i;
  auto sq_clip = [&](const Vector2d& v) {
    return Vector2d(std::min(v[0] * v[0], cfg.obs_force_clip),
                    std::min(v[1] * v[1], cfg.obs_force_clip));
  };
  Vec o(kSumoObsDim);
  o.segment<2>(0) = s.pos[i];
  o.segment<2>(2) = s.vel[i];
  o.segment<2>(4) = s.pos[j];
  o.segment<2>(6) = sq_clip(s.impulse[i]);
  o.segment<2>(8) = sq_clip(s.impulse[j]);
  return o;
}

}  // namespace metaadapt::envs
