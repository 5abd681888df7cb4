"""Causal decision making toolkit.

Synthetic treatment-effect data, tree-based effect and policy learners,
and evaluation metrics that separate estimation quality (effect MSE)
from decision quality (regret, uplift, AUUC).
"""

try:
    from ._cdm import *  # noqa: F401,F403
except ImportError:  # running against an in-tree build directory on PYTHONPATH
    from _cdm import *  # noqa: F401,F403
