#include <cstdio>
int main() { std::puts("acceptance (scaffold)"); return 1; }
