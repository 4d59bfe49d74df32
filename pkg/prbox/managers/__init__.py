from __future__ import annotations

from dask.distributed import Client

from prbox.managers.base import JobFuncType
from prbox.managers.base import JobManager
from prbox.managers.distributed import DistributedJobManager
from prbox.managers.local import LocalJobManager


__all__ = [
    "JobManager",
    "DistributedJobManager",
    "LocalJobManager",
    "JobFuncType",
    "create_manager",
]


def create_manager(n_jobs: int = 1, client: Client | None = None) -> JobManager:
    """Picks the Dask backend when a client is given, local processes otherwise."""
    if client is not None:
        return DistributedJobManager(client)
    return LocalJobManager(n_jobs)
