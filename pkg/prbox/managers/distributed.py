from __future__ import annotations

from collections.abc import Sequence
from typing import Any

from dask.distributed import as_completed
from dask.distributed import Client

from prbox.managers.base import JobFuncType
from prbox.managers.base import JobManager
from prbox.managers.base import ResultCallbackType


class DistributedJobManager(JobManager):
    """Runs jobs on the workers of a Dask cluster.

    .. note::
        Workers need an environment matching the client, including prbox itself.

    Args:
        client:
            An instance of dask client.
    """

    def __init__(self, client: Client) -> None:
        self._client = client

    @property
    def n_workers(self) -> int:
        return max(sum(self._client.nthreads().values()), 1)

    def map(
        self, func: JobFuncType, jobs: Sequence[Any], on_result: ResultCallbackType = None
    ) -> list[Any]:
        if not jobs:
            return []
        futures = self._client.map(func, list(jobs), pure=False)
        positions = {future.key: index for index, future in enumerate(futures)}
        results: list[Any] = [None] * len(futures)
        for future, result in as_completed(futures, with_results=True):
            index = positions[future.key]
            results[index] = result
            if on_result is not None:
                on_result(index, result)
        return results

    def close(self) -> None:
        # The client belongs to the caller.
        ...
