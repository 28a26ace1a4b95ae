"""Physical constants and unit conventions.

All quantities in this package use a single internal unit system chosen so
that typical magnitudes stay close to unity:

* time            fs
* angular detuning rad/fs
* wavelength      nm
* length          mm
* dispersion beta fs^2/mm

With these units a fiber dispersion product beta*L is of order 1e5 fs^2 and
quadratic spectral phases stay well inside double precision.
"""

# Speed of light in nm/fs (equivalently mm/ps, um/ps*1e-3).
SPEED_OF_LIGHT_NM_PER_FS = 299.792458

# Time-bandwidth product (intensity FWHM conventions) of a transform-limited
# Gaussian pulse: delta_nu * delta_t = 0.441.
GAUSSIAN_TIME_BANDWIDTH = 0.441

# 2*ln(2) and 4*ln(2) appear throughout FWHM <-> Gaussian-exponent conversions.
import math

TWO_LN2 = 2.0 * math.log(2.0)
FOUR_LN2 = 4.0 * math.log(2.0)
