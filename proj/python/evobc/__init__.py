"""Evolution equations with time-boundary conditions u(0) = Phi u(tau) + y0."""

from ._evobc import *  # noqa: F401,F403
from ._evobc import __doc__  # noqa: F401
