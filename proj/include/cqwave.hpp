#pragma once

// Umbrella header.
#include "cqwave/bem.hpp"
#include "cqwave/config.hpp"
#include "cqwave/contour.hpp"
#include "cqwave/diagnostics.hpp"
#include "cqwave/error_theory.hpp"
#include "cqwave/errors.hpp"
#include "cqwave/mesh.hpp"
#include "cqwave/output.hpp"
#include "cqwave/pipeline.hpp"
#include "cqwave/pole_atlas.hpp"
#include "cqwave/radau.hpp"
#include "cqwave/scan.hpp"
#include "cqwave/signals.hpp"
#include "cqwave/special_functions.hpp"
#include "cqwave/sphere_solver.hpp"
#include "cqwave/spherical_harmonics.hpp"
#include "cqwave/time_rule.hpp"
#include "cqwave/version.hpp"
#include "cqwave/ztransform.hpp"
