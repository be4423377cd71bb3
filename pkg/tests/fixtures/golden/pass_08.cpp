enum class Mode { off, on };

int main() {
    Mode m = Mode::on;
    return m == Mode::on ? 0 : 1;
}
