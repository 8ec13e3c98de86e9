#pragma once

#include "linalg2.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "sparse.hpp"
#include "elliptic.hpp"
#include "coefficients.hpp"
#include "config.hpp"
#include "initial.hpp"
#include "transport.hpp"
#include "stencil.hpp"
#include "identities.hpp"
#include "mapped.hpp"
#include "mms.hpp"
#include "run.hpp"
#include "sweep.hpp"
#include "verify.hpp"
