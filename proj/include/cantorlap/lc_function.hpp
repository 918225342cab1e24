#pragma once

#include <vector>

namespace cantorlap {

/// A locally constant function stored as one value per path of P_level, in
/// the lexicographic path order.
struct LCFunction {
    int level = 0;
    std::vector<double> values;
};

}  // namespace cantorlap
