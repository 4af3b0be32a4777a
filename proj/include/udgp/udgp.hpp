#pragma once

#include "udgp/bench.hpp"
#include "udgp/instance.hpp"
#include "udgp/io.hpp"
#include "udgp/model.hpp"
#include "udgp/projections.hpp"
#include "udgp/rng.hpp"
#include "udgp/solver.hpp"
