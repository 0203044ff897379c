#include <iostream>

int main() {
  std::cout << "binpose CLI placeholder\n";
  return 0;
}
