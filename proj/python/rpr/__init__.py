# Copyright 2026 The RPR Authors
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

"""Review polarity-wise recommender: python surface over the C++ core."""

from ._rpr import (
    RprError,
    checkpoint_info,
    evaluate,
    explain,
    gradcheck,
    predict,
    prepare,
    synth,
    tokenize,
    train,
)

__all__ = [
    "RprError",
    "checkpoint_info",
    "evaluate",
    "explain",
    "gradcheck",
    "predict",
    "prepare",
    "synth",
    "tokenize",
    "train",
]

__version__ = "0.1.0"
