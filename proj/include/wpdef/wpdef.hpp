#pragma once

#include <wpdef/cm_definability.hpp>
#include <wpdef/errors.hpp>
#include <wpdef/identities.hpp>
#include <wpdef/interval_maps.hpp>
#include <wpdef/lattice.hpp>
#include <wpdef/polynomial.hpp>
#include <wpdef/weierstrass.hpp>
