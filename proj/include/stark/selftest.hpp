// Quick cross-module checks: closed-form examples and the Bessel bound reports.

#pragma once

#include <string>
#include <vector>

#include "stark/specfun.hpp"

namespace stark {

struct SelftestCheck {
    std::string module;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestResult {
    std::vector<SelftestCheck> checks;
    std::vector<BoundReport> bounds;

    bool passed() const;
};

SelftestResult run_selftest();

}  // namespace stark
