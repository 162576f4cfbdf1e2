#pragma once

#include <stdexcept>
#include <string>

namespace vfpen {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// histogram_core
struct invalid_size : error { using error::error; };
struct undefined_estimator : error { using error::error; };
struct quadrature_failure : error { using error::error; };
struct empty_admissible_set : error { using error::error; };

// resampling
struct invalid_fold_count : error { using error::error; };
struct empty_cell : error { using error::error; };
struct undefined_training_fit : error { using error::error; };

// selectors
struct cell_too_small : error { using error::error; };
struct no_admissible_model : error { using error::error; };
struct odd_sample_size : error { using error::error; };

// binomial / V-fold weight theory
struct degenerate_cell : error { using error::error; };

// experiments / cli
struct unknown_function : error { using error::error; };
struct config_error : error { using error::error; };
struct io_error : error { using error::error; };

}  // namespace vfpen
