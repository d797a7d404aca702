#include <binstream/factorization.hpp>

#include <iostream>

int main() {
    const auto rep = binstream::sqrt_binned_report(binstream::ToeplitzSpec(1.0, 0.0, 50), {0.75, 0.02});
    std::cout << "bin_size " << rep.bin_size << '\n';
    return rep.bin_size == 8 ? 0 : 1;
}
