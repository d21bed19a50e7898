"""Workflow orchestration.

Only the thread fan-out is re-exported here: the data layer imports it, so
this module must not pull in the stages (``gazemask.flow.pipeline``,
``gazemask.flow.experiment``), which import the data layer themselves.
"""

from gazemask.flow.parallel import parallel_map, resolve_workers

__all__ = ["parallel_map", "resolve_workers"]
