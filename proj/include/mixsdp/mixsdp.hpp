#pragma once

#include "mixsdp/certificate.hpp"
#include "mixsdp/core.hpp"
#include "mixsdp/error.hpp"
#include "mixsdp/factor_matrix.hpp"
#include "mixsdp/maxcut.hpp"
#include "mixsdp/maxsat.hpp"
#include "mixsdp/mixing.hpp"
#include "mixsdp/oracle.hpp"
#include "mixsdp/rng.hpp"
#include "mixsdp/sparse_cost.hpp"
