#pragma once

#include "dcskel/citest.hpp"
#include "dcskel/datagen.hpp"
#include "dcskel/dependence.hpp"
#include "dcskel/error.hpp"
#include "dcskel/experiment.hpp"
#include "dcskel/io.hpp"
#include "dcskel/learner.hpp"
#include "dcskel/metrics.hpp"
#include "dcskel/parallel.hpp"
#include "dcskel/partition.hpp"
#include "dcskel/scaffold.hpp"
#include "dcskel/types.hpp"
