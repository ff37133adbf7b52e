#include "metaadapt/envs/chains.hpp"

#include <set>
#include <stdexcept>

namespace metaadapt::envs {

std::vector<std::array<int, 2>> all_actuator_pairs(int n) {
  std::vector<std::array<int, 2>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
  return pairs;
}

TaskChain make_crawler_chain(const CrawlerConfig& cfg,
                             std::array<int, 2> pair) {
  TaskChain chain;
  chain.provenance = "crawler-pair-" + std::to_string(pair[0]) + "-" +
                     std::to_string(pair[1]);
  for (int e = 0; e < cfg.episodes_per_chain; ++e)
    chain.tasks.push_back(std::make_shared<CrawlerTask>(cfg, pair, e));
  return chain;
}

ChainSplit make_training_chains(const CrawlerConfig& cfg,
                                std::span<const int> held_out_indices) {
  const auto pairs = all_actuator_pairs(cfg.n_actuators);
  std::set<int> held;
  for (int idx : held_out_indices) {
    if (idx < 0 || idx >= static_cast<int>(pairs.size()))
      throw std::out_of_range("make_training_chains: pair index out of range");
    if (!held.insert(idx).second)
      throw std::invalid_argument(
          "make_training_chains: duplicate held-out pair");
  }
  ChainSplit split;
  for (size_t i = 0; i < pairs.size(); ++i) {
    TaskChain chain = make_crawler_chain(cfg, pairs[i]);
    if (held.count(static_cast<int>(i)))
      split.held_out.push_back(std::move(chain));
    else
      split.train.push_back(std::move(chain));
  }
  return split;
}

}  // namespace metaadapt::envs
