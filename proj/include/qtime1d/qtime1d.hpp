#pragma once

#include "qtime1d/errors.hpp"
#include "qtime1d/faddeeva.hpp"
#include "qtime1d/numerics.hpp"
#include "qtime1d/parallel.hpp"
#include "qtime1d/potential.hpp"
#include "qtime1d/propagator.hpp"
#include "qtime1d/scattering.hpp"
#include "qtime1d/source.hpp"
#include "qtime1d/survival.hpp"
#include "qtime1d/times.hpp"
#include "qtime1d/transfer.hpp"
#include "qtime1d/wavepacket.hpp"
