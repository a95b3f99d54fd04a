# Copyright 2026 The asvvote Authors.
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

"""Adversarial-robustness testbed for speaker verification."""

from ._core import (
    PCM_SCALE,
    Config,
    Error,
    Model,
    apply_filter,
    bim,
    calibrate_threshold,
    derive_seed,
    evaluate,
    false_accept_rate,
    false_reject_rate,
    fbank,
    gen_corpus,
    read_wav,
    sweep_iters,
    sweep_votes,
    train,
    vote_score,
    write_wav,
)

__all__ = [
    "PCM_SCALE",
    "Config",
    "Error",
    "Model",
    "apply_filter",
    "bim",
    "calibrate_threshold",
    "derive_seed",
    "evaluate",
    "false_accept_rate",
    "false_reject_rate",
    "fbank",
    "gen_corpus",
    "read_wav",
    "sweep_iters",
    "sweep_votes",
    "train",
    "vote_score",
    "write_wav",
]
