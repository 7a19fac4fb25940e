// Copyright 2026 The liqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "liqa/audit.hpp"
#include "liqa/demand.hpp"
#include "liqa/generator.hpp"
#include "liqa/instance_io.hpp"
#include "liqa/liquid_welfare.hpp"
#include "liqa/model.hpp"
#include "liqa/private_auction.hpp"
#include "liqa/public_auction.hpp"
#include "liqa/report.hpp"
