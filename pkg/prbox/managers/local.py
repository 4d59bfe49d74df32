from __future__ import annotations

from collections.abc import Sequence
import multiprocessing
from multiprocessing.pool import Pool
from typing import Any

from prbox.managers.base import JobFuncType
from prbox.managers.base import JobManager
from prbox.managers.base import ResultCallbackType


class LocalJobManager(JobManager):
    """Runs jobs on the local machine.

    With a single job slot everything runs inline in the calling process; otherwise a
    pool of worker processes is started on first use.

    Args:
        n_jobs:
            Maximum number of processes running jobs at the same time.
            If less or equal to 0, then this argument is overridden with CPU count.
    """

    def __init__(self, n_jobs: int = 1) -> None:
        if n_jobs <= 0 or n_jobs > multiprocessing.cpu_count():
            self._n_jobs = multiprocessing.cpu_count()
        else:
            self._n_jobs = n_jobs
        self._pool: Pool | None = None

    @property
    def n_workers(self) -> int:
        return self._n_jobs

    def map(
        self, func: JobFuncType, jobs: Sequence[Any], on_result: ResultCallbackType = None
    ) -> list[Any]:
        if self._n_jobs == 1 or len(jobs) <= 1:
            results = []
            for index, job in enumerate(jobs):
                result = func(job)
                if on_result is not None:
                    on_result(index, result)
                results.append(result)
            return results

        if self._pool is None:
            self._pool = multiprocessing.Pool(processes=self._n_jobs)

        results = []
        for index, result in enumerate(self._pool.imap(func, jobs)):
            if on_result is not None:
                on_result(index, result)
            results.append(result)
        return results

    def close(self) -> None:
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None
