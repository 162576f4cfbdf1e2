#pragma once

#include <cstddef>
#include <vector>

#include "vfpen/errors.hpp"

namespace vfpen {

// n paired observations; design points x_i live in [0,1).
struct DataSet {
    std::vector<double> xs;
    std::vector<double> ys;

    std::size_t size() const noexcept { return xs.size(); }

    void validate() const {
        if (xs.size() != ys.size() || xs.empty()) {
            throw invalid_size("dataset needs matching nonempty xs/ys");
        }
    }
};

}  // namespace vfpen
