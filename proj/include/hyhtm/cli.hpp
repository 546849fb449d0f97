#ifndef HYHTM_CLI_HPP_
#define HYHTM_CLI_HPP_

#include <string>
#include <vector>

namespace hyhtm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kDataContractError = 3,
  kDegenerateCorpus = 4,
};

/// Entry point for the `hyhtm` tool: subcommands preprocess, train, evaluate, export.
int run(int argc, char** argv);
/// Same as above with args[0] as the program name.
int run(const std::vector<std::string>& args);

}  // namespace hyhtm::cli

#endif  // HYHTM_CLI_HPP_
