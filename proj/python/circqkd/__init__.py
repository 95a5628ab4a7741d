# Copyright 2026 The circqkd Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Sagnac-loop BB84 simulator."""

import json as _json

from ._core import (
    CSV_SCHEMA,
    SEED_POLICY,
    Scenario,
    ScenarioError,
    calibrate,
    detection_probs,
    expected,
    fringe,
    load_scenario,
    parse_scenario,
    run,
    sweep,
    sweep_axes,
    wilson_interval,
)


def effective(scenario):
    """Effective scenario document as a dict."""
    return _json.loads(scenario.effective_json)


__all__ = [
    "CSV_SCHEMA",
    "SEED_POLICY",
    "Scenario",
    "ScenarioError",
    "calibrate",
    "detection_probs",
    "effective",
    "expected",
    "fringe",
    "load_scenario",
    "parse_scenario",
    "run",
    "sweep",
    "sweep_axes",
    "wilson_interval",
]
