namespace a { int x = 1; }

int main() {
    return b::x;
}
