# Copyright 2026 The imu2shoe Authors
# SPDX-License-Identifier: Apache-2.0

"""Wrist-to-shoe IMU signal translation with conditional GANs."""

from ._core import *  # noqa: F401,F403
from ._core import (
    Error,
    Generator,
    WINDOW_LENGTH,
    baseline_predictor,
    count_parameters,
    forward_trace,
    make_synthetic,
    read_bundle,
    rmse_mae,
    scale_to_unit,
    train,
    unscale_from_unit,
)

__version__ = "0.1.0"
