#include "gaze_events/cli.hpp"

int main(int argc, char** argv) {
    return gaze::cli::run(argc, argv);
}
