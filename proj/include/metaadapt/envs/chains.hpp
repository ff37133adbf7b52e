#pragma once

#include "metaadapt/envs/crawler.hpp"
#include "metaadapt/envs/task.hpp"

#include <span>

namespace metaadapt::envs {

// All unordered actuator pairs of an n-actuator crawler, lexicographic.
std::vector<std::array<int, 2>> all_actuator_pairs(int n);

// The chain for one pair: episodes_per_chain tasks whose pair effectiveness
// decays linearly from 1 to 0.
TaskChain make_crawler_chain(const CrawlerConfig& cfg,
                             std::array<int, 2> pair);

struct ChainSplit {
  std::vector<TaskChain> train;
  std::vector<TaskChain> held_out;
};

// Splits the full pair enumeration into training and held-out chains.
// held_out_indices index into all_actuator_pairs(cfg.n_actuators); they must
// be in range and distinct.
ChainSplit make_training_chains(const CrawlerConfig& cfg,
                                std::span<const int> held_out_indices);

}  // namespace metaadapt::envs
