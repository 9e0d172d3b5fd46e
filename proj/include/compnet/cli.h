// Copyright 2026 The compnet Authors
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


// Command-line front end. `RunCli` holds the whole program so that it can be
// driven from tests; the binary only forwards argv.
//
// Exit codes: 0 success (valid, holds, delivered, equivalent); 1 a negative
// answer (violations, property fails, packet dropped, invalid assumption,
// non-equivalent plan); 2 usage, input, or lookup errors.

#ifndef COMPNET_CLI_H_
#define COMPNET_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace compnet {

// `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace compnet

#endif  // COMPNET_CLI_H_
