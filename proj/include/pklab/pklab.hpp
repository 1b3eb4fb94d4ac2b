#pragma once

#include "pklab/blowup.hpp"
#include "pklab/bounds.hpp"
#include "pklab/config.hpp"
#include "pklab/embedding.hpp"
#include "pklab/error.hpp"
#include "pklab/field_spec.hpp"
#include "pklab/functionals.hpp"
#include "pklab/grid.hpp"
#include "pklab/harness.hpp"
#include "pklab/initial_data.hpp"
#include "pklab/integrator.hpp"
#include "pklab/linalg.hpp"
#include "pklab/model.hpp"
#include "pklab/operators.hpp"
#include "pklab/quadrature.hpp"
#include "pklab/report.hpp"
#include "pklab/run.hpp"
#include "pklab/scenarios.hpp"
#include "pklab/varexp.hpp"
