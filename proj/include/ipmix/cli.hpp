#pragma once

namespace ipmix::cli
{

/// Exit codes: 0 success, 1 numerical or check failure, 2 argument error.
int run(int argc, char** argv);

} // namespace ipmix::cli
