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

// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails.
#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <vector>

#include "criteria.hpp"

namespace dataprep::acceptance {

long long now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double seconds_since(long long start_ns) { return static_cast<double>(now_ns() - start_ns) / 1e9; }

}  // namespace dataprep::acceptance

int main() {
  using namespace dataprep::acceptance;
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "compile-diagnostic completeness", compile_diagnostics},
      {2, "category-law suite", category_laws},
      {3, "checkpoint/resume equivalence", resume_equivalence},
      {4, "serving contract", serving_contract},
      {5, "text-to-sql end-to-end", text2sql_end_to_end},
      {6, "classifier oracles", classifier_oracles},
      {7, "reproducibility", reproducibility},
      {8, "round-trip storage", storage_round_trips},
      {9, "scaffolding", scaffolding},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("%s [%d] %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
