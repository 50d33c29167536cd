"""Numerical toolkit for a Wermer-type set in C^2 and the domain built around it.

Modules, bottom-up:

``lattice``        Gaussian-integer pole spiral and epsilon schedules
``wermer``         sheets, slices and the log-potentials ``phi_n``
``potentials``     the rescaled potential ``phi_tilde`` and domain membership
``analysis``       FD Levi forms, Lelong ratios, Monte Carlo volumes
``continuation``   path lifting, monodromy and the walk between points
``hyperbolicity``  affine-disk probes and Kobayashi lower bounds
``greenfn``        comparison functions for the Green function
``cli``            command-line experiments and reports
"""
from .errors import WermerError
from .lattice import (DEFAULT_SCHEDULE, CustomSchedule, ExponentialSchedule, gauss_point, pole,
                      poles, spiral_index, tail_delta_bound)
from .potentials import PointClass, PotentialParams, classify_point, phi_tilde, phi_total
from .wermer import SheetLabel, phi_n, sheet_value, sheet_values, slice_points

__version__ = "0.1.0"

__all__ = [
    "WermerError",
    "DEFAULT_SCHEDULE",
    "CustomSchedule",
    "ExponentialSchedule",
    "gauss_point",
    "pole",
    "poles",
    "spiral_index",
    "tail_delta_bound",
    "PointClass",
    "PotentialParams",
    "classify_point",
    "phi_tilde",
    "phi_total",
    "SheetLabel",
    "phi_n",
    "sheet_value",
    "sheet_values",
    "slice_points",
]
