from __future__ import annotations

import abc
from abc import ABC
from collections.abc import Sequence
from types import TracebackType
from typing import Any
from typing import Callable
from typing import Optional


JobFuncType = Callable[[Any], Any]
ResultCallbackType = Optional[Callable[[int, Any], None]]


class JobManager(ABC):
    """Runs independent jobs and hands back their results in submission order.

    Managers hide where the work actually happens: in this process, in a pool of local
    processes or on the workers of a Dask cluster. Jobs must be picklable and must not
    rely on state of the calling process.
    """

    @abc.abstractmethod
    def map(
        self, func: JobFuncType, jobs: Sequence[Any], on_result: ResultCallbackType = None
    ) -> list[Any]:
        """Applies ``func`` to every job.

        Args:
            func:
                A module level callable taking a single job.
            jobs:
                Arguments for each call.
            on_result:
                Optional callback receiving ``(job index, result)`` as soon as a job
                finishes, e.g. to advance a progress bar.
        """
        raise NotImplementedError

    @abc.abstractmethod
    def close(self) -> None:
        """Releases workers held by the manager."""
        raise NotImplementedError

    @property
    @abc.abstractmethod
    def n_workers(self) -> int:
        """Number of jobs that may run at the same time."""
        raise NotImplementedError

    def __enter__(self) -> JobManager:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        traceback: TracebackType | None,
    ) -> None:
        self.close()
