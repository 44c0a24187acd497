#pragma once

#include "stemcycle/bench.hpp"
#include "stemcycle/instance.hpp"
#include "stemcycle/onetree.hpp"
#include "stemcycle/sc_structure.hpp"
#include "stemcycle/search.hpp"
