#pragma once

#include "ctbpq/arrivals.hpp"
#include "ctbpq/compensated_sum.hpp"
#include "ctbpq/config.hpp"
#include "ctbpq/distribution.hpp"
#include "ctbpq/engine.hpp"
#include "ctbpq/errors.hpp"
#include "ctbpq/mtmc.hpp"
#include "ctbpq/piecewise_pdf.hpp"
#include "ctbpq/pipeline.hpp"
#include "ctbpq/poisson.hpp"
#include "ctbpq/random.hpp"
#include "ctbpq/simulator.hpp"
#include "ctbpq/triangular.hpp"
#include "ctbpq/truncation.hpp"
