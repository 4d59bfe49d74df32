from collections.abc import Callable
from fractions import Fraction
import random

from dask.distributed import Client
from dask.distributed import LocalCluster
import pytest

from prbox.boxes import Box
from prbox.boxes import make_deterministic
from prbox.boxes import make_isotropic
from prbox.boxes import make_perfect
from prbox.boxes import mix
from prbox.strategies import LocalDetStrategy
from prbox.strategies import enumerate_strategies


_test_cluster = LocalCluster(n_workers=1, threads_per_worker=1)
_test_client = Client(_test_cluster.scheduler_address)

RandomBoxFactory = Callable[[int], Box]


@pytest.fixture
def client() -> Client:
    return _test_client


@pytest.fixture
def isotropic_one() -> Box:
    return make_isotropic(1, Fraction(1, 8))


@pytest.fixture
def isotropic_two() -> Box:
    return make_isotropic(2, Fraction(1, 8))


def _random_box(seed: int) -> Box:
    rng = random.Random(seed)
    perfect = make_perfect(1)
    strategies: list[LocalDetStrategy] = list(enumerate_strategies(1))  # type: ignore
    parts = [make_deterministic(s) for s in strategies]
    parts += [perfect, Box(perfect.table[::-1])]
    counts = [rng.randint(0, 6) for _ in parts]
    counts[-2] += 1
    total = sum(counts)
    return mix([Fraction(c, total) for c in counts], parts)


@pytest.fixture
def random_box() -> RandomBoxFactory:
    """Seeded random non-signalling 2x2 box with a nonzero PR component."""
    return _random_box
