#pragma once

#include "irp/analytics.hpp"
#include "irp/dataset.hpp"
#include "irp/error.hpp"
#include "irp/io.hpp"
#include "irp/losses.hpp"
#include "irp/max_flow.hpp"
#include "irp/mincut.hpp"
#include "irp/oracles.hpp"
#include "irp/path.hpp"
#include "irp/random.hpp"
