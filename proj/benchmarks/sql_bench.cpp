// Copyright 2026 The dataprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "dataprep/sql.hpp"

namespace dataprep::sql {
namespace {

const std::vector<std::string>& queries() {
  static const std::vector<std::string> q = {
      "SELECT name FROM singer",
      "SELECT country, COUNT(*) FROM singer GROUP BY country ORDER BY COUNT(*) DESC",
      "SELECT s.name, v.name FROM singer s JOIN show h ON s.singer_id = h.singer_id "
      "JOIN venue v ON h.venue_id = v.venue_id WHERE v.capacity > (SELECT AVG(capacity) FROM venue)",
      "WITH top AS (SELECT venue_id, SUM(attendance) AS a FROM show GROUP BY venue_id) "
      "SELECT name FROM venue WHERE venue_id IN (SELECT venue_id FROM top) UNION SELECT name FROM singer",
  };
  return q;
}

void BM_ScanFeatures(benchmark::State& state) {
  const auto& sql = queries()[state.range(0)];
  for (auto _ : state) {
    auto f = scan(sql);
    benchmark::DoNotOptimize(f);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(sql.size()));
}
BENCHMARK(BM_ScanFeatures)->DenseRange(0, 3);

void BM_ClassifyComponent(benchmark::State& state) {
  const ComponentRules rules;
  for (auto _ : state) {
    for (const auto& q : queries()) {
      auto f = scan(q);
      benchmark::DoNotOptimize(rules.classify(*f));
    }
  }
}
BENCHMARK(BM_ClassifyComponent);

void BM_ExtractFromReply(benchmark::State& state) {
  std::string reply;
  for (int i = 0; i < state.range(0); ++i) reply += "Step " + std::to_string(i) + ": reason about the join.\n";
  reply += "```sql\n" + queries()[2] + "\n```\nDone.";
  for (auto _ : state) {
    auto sql = extract_sql(reply);
    benchmark::DoNotOptimize(sql);
  }
}
BENCHMARK(BM_ExtractFromReply)->Arg(4)->Arg(64);

}  // namespace
}  // namespace dataprep::sql

BENCHMARK_MAIN();
