#pragma once

// Chain trace serialization: JSON Lines, one object per iteration with
// keys {"iter","log_jmp","trees","beta","sigma2","moves"}; tree indices
// in "moves" are 1-based like feature indices in expressions.

#include <string>
#include <vector>

#include "symforest/sampler.hpp"

namespace symforest {

void write_trace_jsonl(const ChainTrace& trace, const std::string& path);
ChainTrace read_trace_jsonl(const std::string& path);

// Plot-ready series: CSV of iter,log_jmp.
void write_log_jmp_series_csv(const ChainTrace& trace, const std::string& path);

}  // namespace symforest
