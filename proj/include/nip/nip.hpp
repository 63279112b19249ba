#ifndef NIP_NIP_HPP
#define NIP_NIP_HPP

#include "nip/commands.hpp"
#include "nip/diagnostics.hpp"
#include "nip/error.hpp"
#include "nip/geometry.hpp"
#include "nip/io.hpp"
#include "nip/oracle.hpp"
#include "nip/schedule.hpp"
#include "nip/solver.hpp"
#include "nip/vector.hpp"

#endif // NIP_NIP_HPP
