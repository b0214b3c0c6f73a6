#pragma once

#include "fedadm/model.hpp"

namespace fedadm::testing {

// One class, no provider room: the smallest non-trivial system.
inline SystemConfig single_class(int lc, int pc = 0) {
    SystemConfig c;
    c.local_capacity = lc;
    c.provider_capacity = pc;
    c.classes = {TrafficClass{10.0, 4.0, 2, 100.0, 30.0}};
    return c;
}

// Default classes on shrunken capacities, small enough for dense oracles.
inline SystemConfig small_two_class(int lc = 8, int pc = 4) {
    SystemConfig c = default_config();
    c.local_capacity = lc;
    c.provider_capacity = pc;
    return c;
}

} // namespace fedadm::testing
