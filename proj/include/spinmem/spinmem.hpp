/*
   Copyright 2026 The spinmem authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include "spinmem/analytic.hpp"
#include "spinmem/errors.hpp"
#include "spinmem/fft.hpp"
#include "spinmem/harness.hpp"
#include "spinmem/harness_io.hpp"
#include "spinmem/io.hpp"
#include "spinmem/lorentz.hpp"
#include "spinmem/noise_areas.hpp"
#include "spinmem/params.hpp"
#include "spinmem/pool.hpp"
#include "spinmem/powerlaw.hpp"
#include "spinmem/rng.hpp"
#include "spinmem/sde.hpp"
#include "spinmem/spectrum.hpp"
#include "spinmem/trajectory.hpp"
#include "spinmem/welch.hpp"
