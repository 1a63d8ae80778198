#ifndef EVO_EVO_HPP_
#define EVO_EVO_HPP_

#include "evo/analysis.hpp"
#include "evo/core.hpp"
#include "evo/frequency_solver.hpp"
#include "evo/material_laws.hpp"
#include "evo/signal.hpp"
#include "evo/spatial_operators.hpp"
#include "evo/stability_certifier.hpp"
#include "evo/weighted_signals.hpp"

#endif  // EVO_EVO_HPP_
