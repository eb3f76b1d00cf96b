#pragma once

#include "nfcl/beam.hpp"
#include "nfcl/bessel.hpp"
#include "nfcl/config.hpp"
#include "nfcl/curve.hpp"
#include "nfcl/errors.hpp"
#include "nfcl/experiment.hpp"
#include "nfcl/fiber.hpp"
#include "nfcl/fit.hpp"
#include "nfcl/io.hpp"
#include "nfcl/pldos.hpp"
