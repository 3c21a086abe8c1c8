#pragma once

// Umbrella header.

#include <stosqp/core.hpp>
#include <stosqp/det_sqp.hpp>
#include <stosqp/finite_diff.hpp>
#include <stosqp/harness.hpp>
#include <stosqp/kkt.hpp>
#include <stosqp/merit.hpp>
#include <stosqp/metrics.hpp>
#include <stosqp/oracle.hpp>
#include <stosqp/problem.hpp>
#include <stosqp/record.hpp>
#include <stosqp/stoch_sqp.hpp>
#include <stosqp/subgradient.hpp>
#include <stosqp/suite.hpp>
