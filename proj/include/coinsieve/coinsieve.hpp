#pragma once

#include "coinsieve/errors.hpp"
#include "coinsieve/expsum.hpp"
#include "coinsieve/inequalities.hpp"
#include "coinsieve/measure.hpp"
#include "coinsieve/mpfloat.hpp"
#include "coinsieve/number_theory.hpp"
#include "coinsieve/parallel.hpp"
#include "coinsieve/poly_square.hpp"
#include "coinsieve/rational.hpp"
#include "coinsieve/residue_dp.hpp"
#include "coinsieve/rng.hpp"
#include "coinsieve/sieve_lab.hpp"
