import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

from prefeval.trec_io import parse_graded_qrels, parse_run


@pytest.fixture
def small_qrels():
    """Three topics: a spread of grades, a single-grade topic, an all-zero topic."""
    text = "\n".join(
        [
            "t1 0 dA 4",
            "t1 0 dB 3",
            "t1 0 dC 3",
            "t1 0 dD 1",
            "t1 0 dE 0",
            "t1 0 dF 0",
            "t2 0 dX 2",
            "t2 0 dY 2",
            "t2 0 dZ 0",
            "t3 0 dN 0",
        ]
    )
    return parse_graded_qrels(text, "small_qrels")


@pytest.fixture
def small_run():
    text = "\n".join(
        [
            "t1 Q0 dB 1 9.0 sys",
            "t1 Q0 dA 2 8.0 sys",
            "t1 Q0 dD 3 7.0 sys",
            "t1 Q0 dC 4 6.0 sys",
            "t2 Q0 dY 1 5.0 sys",
            "t2 Q0 dX 2 4.0 sys",
        ]
    )
    return parse_run(text, "small_run")
