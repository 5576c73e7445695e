// Copyright 2026 The avsync Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "avsync/adaptive.hpp"
#include "avsync/align.hpp"
#include "avsync/audio_io.hpp"
#include "avsync/csv.hpp"
#include "avsync/error.hpp"
#include "avsync/experiment.hpp"
#include "avsync/listener.hpp"
#include "avsync/ltc.hpp"
#include "avsync/melspec.hpp"
#include "avsync/mst.hpp"
#include "avsync/parallel.hpp"
#include "avsync/random.hpp"
#include "avsync/selection.hpp"
#include "avsync/stats.hpp"
#include "avsync/synth.hpp"
