#ifndef GLVORTEX_GLVORTEX_HPP
#define GLVORTEX_GLVORTEX_HPP

#include "glvortex/errors.hpp"
#include "glvortex/geometry.hpp"
#include "glvortex/quadrature.hpp"
#include "glvortex/spectral.hpp"
#include "glvortex/field.hpp"
#include "glvortex/trajectory.hpp"
#include "glvortex/snapshot_io.hpp"
#include "glvortex/dynamics.hpp"
#include "glvortex/energy.hpp"
#include "glvortex/kernel.hpp"
#include "glvortex/weighted_energy.hpp"
#include "glvortex/hodge.hpp"
#include "glvortex/vortex.hpp"
#include "glvortex/mcf.hpp"
#include "glvortex/config.hpp"
#include "glvortex/experiment.hpp"

#endif  // GLVORTEX_GLVORTEX_HPP
