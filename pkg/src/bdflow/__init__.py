"""Bresch-Desjardins viscosities, porous-medium flow and the vanishing-pressure limit."""

from .kernels import BACKEND
from .viscosity import ViscosityLaw, make_power_law, make_general_law, eval_law, check_conditions
from .exact import (
    pme_exponents,
    make_barenblatt,
    ExtinctionSolution,
    similarity_exponents_cns,
)
from .discrete import Grid, DensityField, VelocityField, make_grid

__version__ = "0.1.0"
