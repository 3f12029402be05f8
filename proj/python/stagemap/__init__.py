"""Width-partitioned multi-exit deployment planning for heterogeneous SoCs.

Thin python wrapper over the C++ core. All planning, evaluation, simulation
and search entry points live in the compiled extension; this package only
re-exports them.
"""

from ._stagemap import *  # noqa: F401,F403
from ._stagemap import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
