// Copyright 2026 The RPR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace rpr::cli {

// Subcommand dispatcher behind the `rpr` executable: synth, prepare, train,
// evaluate, explain, ablate, sweep, gradcheck. Exit codes: 0 success, 1 usage
// error, 2 data or config error, 3 divergence or failed gradient
// certification.
int run_cli(int argc, char** argv);

}  // namespace rpr::cli
