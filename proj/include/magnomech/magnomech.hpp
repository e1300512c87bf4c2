#pragma once

#include "magnomech/config.hpp"
#include "magnomech/entanglement.hpp"
#include "magnomech/errors.hpp"
#include "magnomech/fluctuations.hpp"
#include "magnomech/fourier.hpp"
#include "magnomech/linalg.hpp"
#include "magnomech/meanfield.hpp"
#include "magnomech/ode.hpp"
#include "magnomech/params.hpp"
#include "magnomech/pipeline.hpp"
#include "magnomech/presets.hpp"
#include "magnomech/sweep.hpp"
#include "magnomech/version.hpp"
