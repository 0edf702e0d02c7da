#pragma once

#include "bloch.hpp"
#include "chain_model.hpp"
#include "errors.hpp"
#include "free_particle.hpp"
#include "observables.hpp"
#include "special.hpp"
#include "symplectic.hpp"
