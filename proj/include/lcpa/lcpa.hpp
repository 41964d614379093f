#pragma once

#include "lcpa/bench.hpp"
#include "lcpa/bitstring.hpp"
#include "lcpa/conv.hpp"
#include "lcpa/entropy.hpp"
#include "lcpa/error.hpp"
#include "lcpa/finite_size.hpp"
#include "lcpa/keyfile.hpp"
#include "lcpa/partition.hpp"
#include "lcpa/pipeline.hpp"
#include "lcpa/session.hpp"
#include "lcpa/toeplitz.hpp"
#include "lcpa/transport.hpp"
#include "lcpa/verify.hpp"
#include "lcpa/wire.hpp"
