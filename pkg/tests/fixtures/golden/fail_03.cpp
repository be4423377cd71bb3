struct Empty {};

int main() {
    Empty e;
    return e.size;
}
