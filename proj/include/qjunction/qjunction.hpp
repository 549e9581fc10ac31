#pragma once

#include "qjunction/error.hpp"
#include "qjunction/junction.hpp"
#include "qjunction/quadrature.hpp"
#include "qjunction/channels.hpp"
#include "qjunction/interior_eigen.hpp"
#include "qjunction/dn_map.hpp"
#include "qjunction/scattering.hpp"
#include "qjunction/vertex_bc.hpp"
#include "qjunction/oracle.hpp"
