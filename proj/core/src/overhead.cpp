// Copyright 2026 The bht-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <stdexcept>

#include "bht/campaign.hpp"

namespace bht {

double OverheadReport::mean_ratio() const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const OverheadRow& r : rows) sum += r.ratio;
  return sum / static_cast<double>(rows.size());
}

std::string OverheadReport::to_table() const {
  std::string out =
      "# workload quantum yield_density instr_plain instr_hardened ratio self_stop_pes "
      "timer_stop_pes self_stop_overhead timer_stop_overhead\n";
  char buf[256];
  for (const OverheadRow& r : rows) {
    std::snprintf(buf, sizeof buf, " %u %.3f %llu %llu %.6f %llu %llu %.6f %.6f\n", r.quantum,
                  r.yield_density, static_cast<unsigned long long>(r.instr_plain),
                  static_cast<unsigned long long>(r.instr_hardened), r.ratio,
                  static_cast<unsigned long long>(r.self_stop_pes),
                  static_cast<unsigned long long>(r.timer_stop_pes), r.self_stop_overhead,
                  r.timer_stop_overhead);
    out += r.workload + buf;
  }
  return out;
}

OverheadReport measure_overhead(std::span<const Workload> workloads,
                                std::span<const std::uint32_t> quanta,
                                const TreatmentConfig& base) {
  OverheadReport report;
  for (const Workload& w : workloads) {
    const PlainRun plain = run_plain(w.image);
    if (!plain.state.halted) throw std::invalid_argument("workload " + w.name + " does not halt");
    for (std::uint32_t q : quanta) {
      TreatmentConfig cfg = TreatmentConfig::for_quantum(q);
      cfg.retry_limit = base.retry_limit;
      cfg.commit_cost = base.commit_cost;
      cfg.pe_limit = base.pe_limit;
      const HardenedRun run = run_hardened(w.image, cfg);
      OverheadRow row;
      row.workload = w.name;
      row.quantum = q;
      row.yield_density = w.yield_density;
      row.instr_plain = plain.instr_count;
      row.instr_hardened = run.stats.hardened_instructions();
      row.ratio = plain.instr_count == 0 ? 0.0
                                         : static_cast<double>(row.instr_hardened) /
                                               static_cast<double>(plain.instr_count);
      row.self_stop_pes = run.stats.self_stop_pes;
      row.timer_stop_pes = run.stats.timer_stop_pes;
      row.self_stop_overhead = run.stats.self_stop_overhead();
      row.timer_stop_overhead = run.stats.timer_stop_overhead();
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace bht
