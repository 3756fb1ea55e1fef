#include <cstdio>
#include <iostream>

#include "ksic/verification.hpp"

int main() {
    using namespace ksic::verification;
    Options o;
    o.level = Level::full;
    o.on_check = [](const Check& c) { std::cout << format_line(c) << std::endl; };
    const auto all = run_all(o);
    int failed = 0;
    for (const auto& c : all) failed += !c.pass;
    std::cout << (all.size() - static_cast<std::size_t>(failed)) << "/" << all.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
