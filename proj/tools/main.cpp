// Copyright 2026 The sdxkit Authors
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

#include <iostream>

#include "cli.hpp"
#include "sdx/error.hpp"

int main(int argc, char** argv) {
  using namespace sdx::cli;
  CLI::App app{"sdx: music demixing dataset, evaluation and listening-test toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SDX_VERSION);

  Common common;
  Actions actions;
  register_data(app, common, actions);
  register_eval(app, common, actions);
  register_robust(app, common, actions);
  register_listen(app, common, actions);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << app.help();
    std::cerr << nlohmann::json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    apply_config(*sub, common.config);
    actions.at(sub->get_name())(*sub);
  } catch (const sdx::Error& e) {
    std::cerr << nlohmann::json{{"error", std::string(sdx::to_string(e.code()))}, {"message", e.what()}}.dump()
              << "\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
