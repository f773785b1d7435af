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

// One function per acceptance criterion. Each returns a verdict plus a short
// measurement line; any exception counts as a failure.
#ifndef DATAPREP_TESTS_ACCEPTANCE_CRITERIA_HPP_
#define DATAPREP_TESTS_ACCEPTANCE_CRITERIA_HPP_

#include <string>

namespace dataprep::acceptance {

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict compile_diagnostics();      // 1
Verdict category_laws();            // 2
Verdict resume_equivalence();       // 3
Verdict serving_contract();         // 4
Verdict text2sql_end_to_end();      // 5
Verdict classifier_oracles();       // 6
Verdict reproducibility();          // 7
Verdict storage_round_trips();      // 8
Verdict scaffolding();              // 9

/// Seconds since `start`, for the detail lines.
double seconds_since(long long start_ns);
long long now_ns();

}  // namespace dataprep::acceptance

#endif  // DATAPREP_TESTS_ACCEPTANCE_CRITERIA_HPP_
