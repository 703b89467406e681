#pragma once
#include <solar/error.hpp>
#include <solar/ext_interval.hpp>
#include <solar/solar_base.hpp>
#include <solar/penalty.hpp>
#include <solar/reflection_group.hpp>
#include <solar/simplex_ls.hpp>
#include <solar/majorization.hpp>
#include <solar/dual_solver.hpp>
#include <solar/fast_solvers.hpp>
#include <solar/expofam.hpp>
#include <solar/oracle_solve.hpp>
#include <solar/fit.hpp>
#include <solar/oracle.hpp>
