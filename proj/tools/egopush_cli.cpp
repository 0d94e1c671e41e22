#include <cstdio>

// Placeholder entry point; the subcommand surface lands with evalcli.
int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::puts("egopush: CLI not wired up yet");
  return 1;
}
