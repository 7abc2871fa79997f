"""confbill: planar mechanical billiards and their conformal dualities.

Simulates billiards in Hooke, Kepler, Stark-type, two-center and free force
fields, realizes the conformal correspondences between them (power maps and
the Birkhoff map) as executable transformations of phase points, walls and
trajectories, and verifies the associated first integrals numerically.
"""

from ._kernel import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
