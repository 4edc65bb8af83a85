// relverify: batch verifier for relational properties of pointer programs.
// Subcommands land here as the pipeline fills in.

#include <cstdio>

int main(int, char**) {
  std::fprintf(stderr, "relverify: not wired up yet\n");
  return 2;
}
