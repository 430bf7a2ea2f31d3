#pragma once

namespace dgm {

/// Exit codes: 0 success, 1 unexpected failure, 2 usage or input error, 3 every requested metric failed.
int run_cli(int argc, char** argv);

}  // namespace dgm
