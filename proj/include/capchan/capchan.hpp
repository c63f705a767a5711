#pragma once

// Everything except the command-line frontend (capchan/cli.hpp).

#include "capchan/error.hpp"
#include "capchan/params.hpp"
#include "capchan/dop853.hpp"
#include "capchan/profile.hpp"
#include "capchan/classify.hpp"
#include "capchan/shoot.hpp"
#include "capchan/bounds.hpp"
#include "capchan/io.hpp"
