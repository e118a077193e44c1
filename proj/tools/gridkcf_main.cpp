#include "gridkcf/app.hpp"

int main(int argc, char** argv) {
    return gridkcf::run_cli(argc, argv);
}
