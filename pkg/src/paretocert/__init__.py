"""Certificates for efficiency and value-function support in multicriteria optimization."""

__version__ = "0.1.0"

from . import exprlang, geoffrion, kkt, linprog, pareto, problems, support  # noqa: F401
from .problems import builtin, load_problem  # noqa: F401
