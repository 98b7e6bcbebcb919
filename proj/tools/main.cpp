#include "ipmix/cli.hpp"

int main(int argc, char** argv)
{
    return ipmix::cli::run(argc, argv);
}
