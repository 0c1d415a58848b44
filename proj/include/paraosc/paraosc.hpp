#pragma once

// Umbrella header for the para-oscillator simulation library.

#include "fockspace.hpp"
#include "paraalgebra.hpp"
#include "hamiltonian.hpp"
#include "numeric.hpp"
#include "evolution.hpp"
#include "master.hpp"
#include "rwa.hpp"
#include "protocol.hpp"
#include "nnls.hpp"
#include "rng.hpp"
#include "serialize.hpp"
#include "svg.hpp"
#include "config.hpp"
