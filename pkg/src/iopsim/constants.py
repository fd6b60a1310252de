"""Physical constants and unit helpers shared across the package."""

import math

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
BOLTZMANN = 1.380649e-23  # J/K
DB_PER_NEPER_POWER = 10.0 * math.log10(math.e)  # 4.3429 dB per unit alpha*d

DEFAULT_TEMPERATURE = 290.0  # K


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)
