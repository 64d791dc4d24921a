#include <cstdio>
int main() { std::puts("qamem (scaffold)"); return 0; }
