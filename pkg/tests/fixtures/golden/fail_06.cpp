class Sealed {
    int hidden;
};

int main() {
    Sealed s;
    return s.hidden;
}
