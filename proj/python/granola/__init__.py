# Copyright 2026 The Granola Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Multi-granularity QA evaluation: metrics, DRAG decoding, enrichment."""

from granola._core import (
    ConfigError,
    DataError,
    GranolaError,
    ProviderError,
    aggregate_majority,
    dataset_stats,
    decode,
    disambiguate,
    evaluate,
    exact_match,
    load_dataset,
    match_level,
    meta_eval,
    normalize,
    parse_levels,
    render_prompt,
    run,
    token_f1,
)

__all__ = [
    "ConfigError",
    "DataError",
    "GranolaError",
    "ProviderError",
    "aggregate_majority",
    "dataset_stats",
    "decode",
    "disambiguate",
    "evaluate",
    "exact_match",
    "load_dataset",
    "match_level",
    "meta_eval",
    "normalize",
    "parse_levels",
    "render_prompt",
    "run",
    "token_f1",
]
