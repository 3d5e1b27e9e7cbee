"""Information geometry and matching priors for one-sided truncated families.

Thin Python face of the C++ core: model registry, geometric quantities,
matching-condition residuals, sampling, likelihood fits, exact-quadrature
posteriors, and Monte Carlo matching experiments.
"""

try:
    from ._truncgeo import *  # noqa: F401,F403  (installed package layout)
    from ._truncgeo import __version__  # noqa: F401
except ImportError:  # pragma: no cover - in-tree test layout
    from _truncgeo import *  # noqa: F401,F403
    from _truncgeo import __version__  # noqa: F401
