#include "metaadapt/policy/layout.hpp"

#include <stdexcept>

namespace metaadapt::policy {

MlpLayout MlpLayout::make(int in, const std::vector<int>& hidden, int out,
                          bool log_std, int group,
                          const std::string& prefix) {
  if (in <= 0 || out <= 0)
    throw std::invalid_argument("MlpLayout: widths must be positive");
  MlpLayout l;
  l.widths.push_back(in);
  for (int h : hidden) {
    if (h <= 0) throw std::invalid_argument("MlpLayout: widths must be positive");
    l.widths.push_back(h);
  }
  l.widths.push_back(out);
  l.has_log_std = log_std;

  int offset = 0;
  for (size_t i = 0; i + 1 < l.widths.size(); ++i) {
    const int rows = l.widths[i + 1];
    const int cols = l.widths[i];
    ParamBlock w{prefix + "_w" + std::to_string(i), offset, rows * cols, rows,
                 cols, group};
    offset += w.size;
    ParamBlock b{prefix + "_b" + std::to_string(i), offset, rows, 0, 0, group};
    offset += b.size;
    l.blocks.push_back(std::move(w));
    l.blocks.push_back(std::move(b));
  }
  if (log_std) {
    ParamBlock s{prefix + "_log_std", offset, out, 0, 0, group};
    offset += s.size;
    l.blocks.push_back(std::move(s));
  }
  l.total = offset;
  return l;
}

const ParamBlock& MlpLayout::log_std_block() const {
  if (!has_log_std)
    throw std::logic_error("MlpLayout: no log_std block in this layout");
  return blocks.back();
}

AgentLayout AgentLayout::make(const PolicySpec& s) {
  AgentLayout a;
  a.spec = s;
  a.policy = MlpLayout::make(s.obs_dim, s.hidden, s.act_dim, true, 0, "pi");
  a.value = MlpLayout::make(s.obs_dim, s.hidden, 1, false, 1, "vf");
  return a;
}

std::vector<ParamBlock> AgentLayout::combined_blocks() const {
  std::vector<ParamBlock> out = policy.blocks;
  for (ParamBlock b : value.blocks) {
    b.offset += policy.total;
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace metaadapt::policy
