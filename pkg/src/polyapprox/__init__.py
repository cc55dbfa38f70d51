"""Circumscribed polytopal approximation of convex bodies.

Modules:

* :mod:`polyapprox.bodies`: support / projection oracles for convex bodies;
* :mod:`polyapprox.volumes`: intrinsic volumes (closed form and Kubota Monte-Carlo);
* :mod:`polyapprox.net`: greedy delta-nets on boundaries of outer parallel bodies;
* :mod:`polyapprox.approx`: circumscribed polytopes and Hausdorff distances;
* :mod:`polyapprox.shape`: dimension constants and the elongation shape factor;
* :mod:`polyapprox.cli`: scenario runner.
"""

__version__ = "0.1.0"

from .errors import PolyApproxError  # noqa: F401
