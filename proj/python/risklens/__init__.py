"""Risk labeling and direction-of-risk explanations on transition graphs.

Typical use::

    log = risklens.cliff_generate(episodes=200, max_steps=300, seed=1)
    graph = risklens.TransitionGraph.build(log, epsilon=0.05)
    risk = risklens.label_binary(graph)
    e = risklens.direction_of_risk(graph, risk, [0.6, 0.5], depth=6)
"""

from ._risklens import *  # noqa: F401,F403
from ._risklens import RisklensError

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
