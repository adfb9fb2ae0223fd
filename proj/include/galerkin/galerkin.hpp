#pragma once

#include "galerkin/cylinder.hpp"
#include "galerkin/dynamics.hpp"
#include "galerkin/errors.hpp"
#include "galerkin/field.hpp"
#include "galerkin/kolmogorov.hpp"
#include "galerkin/lattice.hpp"
#include "galerkin/measure.hpp"
#include "galerkin/parallel.hpp"
#include "galerkin/polynomial.hpp"
#include "galerkin/rng.hpp"
#include "galerkin/summation.hpp"
#include "galerkin/triads.hpp"
#include "galerkin/truncation.hpp"
#include "galerkin/version.hpp"
