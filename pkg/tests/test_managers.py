import multiprocessing
import sys
from unittest.mock import Mock

from dask.distributed import Client
import pytest

from prbox.managers import DistributedJobManager
from prbox.managers import LocalJobManager
from prbox.managers import create_manager


def _square(value: int) -> int:
    return value * value


def test_distributed_map_keeps_order(client: Client) -> None:
    manager = DistributedJobManager(client)
    assert manager.map(_square, list(range(10))) == [i * i for i in range(10)]


def test_distributed_reports_each_result(client: Client) -> None:
    callback = Mock()
    DistributedJobManager(client).map(_square, [1, 2, 3], on_result=callback)
    assert sorted(c.args for c in callback.call_args_list) == [(0, 1), (1, 4), (2, 9)]


def test_distributed_empty_jobs(client: Client) -> None:
    assert DistributedJobManager(client).map(_square, []) == []


def test_distributed_n_workers(client: Client) -> None:
    assert DistributedJobManager(client).n_workers == 1


def test_distributed_close_keeps_client(client: Client) -> None:
    with DistributedJobManager(client) as manager:
        manager.map(_square, [2])
    assert client.status == "running"


def test_local_inline_map() -> None:
    callback = Mock()
    with LocalJobManager(n_jobs=1) as manager:
        assert manager.map(_square, [3, 4], on_result=callback) == [9, 16]
    assert [c.args for c in callback.call_args_list] == [(0, 9), (1, 16)]


@pytest.mark.skipif(sys.platform == "win32", reason="Local processes not supported on Windows.")
@pytest.mark.skipif(multiprocessing.cpu_count() < 2, reason="Needs two cores.")
def test_local_worker_pool_management() -> None:
    manager = LocalJobManager(n_jobs=2)
    assert manager.map(_square, list(range(8))) == [i * i for i in range(8)]
    assert manager._pool is not None
    manager.close()
    assert manager._pool is None


@pytest.mark.parametrize("n_jobs", [-1, 0, 10**6])
def test_local_n_jobs_defaults_to_cpu_count(n_jobs: int) -> None:
    assert LocalJobManager(n_jobs).n_workers == multiprocessing.cpu_count()


def test_create_manager(client: Client) -> None:
    assert isinstance(create_manager(client=client), DistributedJobManager)
    assert isinstance(create_manager(1), LocalJobManager)
