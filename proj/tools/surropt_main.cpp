#include "surropt/cli.hpp"

int main(int argc, char** argv)
{
    return surropt::cli::main(argc, argv);
}
