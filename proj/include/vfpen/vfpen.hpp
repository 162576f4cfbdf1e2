#pragma once

#include "vfpen/binomial.hpp"
#include "vfpen/config.hpp"
#include "vfpen/dataset.hpp"
#include "vfpen/errors.hpp"
#include "vfpen/experiments.hpp"
#include "vfpen/fit.hpp"
#include "vfpen/folds.hpp"
#include "vfpen/oracle.hpp"
#include "vfpen/partition.hpp"
#include "vfpen/quadrature.hpp"
#include "vfpen/report.hpp"
#include "vfpen/rng.hpp"
#include "vfpen/scenario.hpp"
#include "vfpen/selectors.hpp"
#include "vfpen/vfold_theory.hpp"
