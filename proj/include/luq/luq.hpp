#pragma once

#include "luq/bloch.hpp"
#include "luq/equivalence2.hpp"
#include "luq/equivalence3.hpp"
#include "luq/families.hpp"
#include "luq/invariants.hpp"
#include "luq/linalg.hpp"
#include "luq/oracle.hpp"
#include "luq/pauli.hpp"
#include "luq/statefile.hpp"
#include "luq/statekit.hpp"
