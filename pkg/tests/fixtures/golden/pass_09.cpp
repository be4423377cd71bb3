#include <array>

constexpr int first(const std::array<int, 3>& a) {
    return a[0];
}

int main() {
    return first({0, 1, 2});
}
