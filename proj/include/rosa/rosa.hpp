#pragma once

#include "rosa/assoc.hpp"
#include "rosa/error.hpp"
#include "rosa/forksim.hpp"
#include "rosa/kernel.hpp"
#include "rosa/script.hpp"
#include "rosa/semiring.hpp"
#include "rosa/tsv.hpp"
#include "rosa/value.hpp"
