import pytest

from recdist import SolveOptions, Solver, make

_SOLVERS: dict = {}


def shared_solver(name: str) -> Solver:
    """Session-wide memoized solver per catalog entry (float mode, defaults).

    The big bottom-up tables (n up to 8192) are expensive to rebuild, so test
    modules and the acceptance suite share them.
    """
    if name not in _SOLVERS:
        _SOLVERS[name] = make(name).solver()
    return _SOLVERS[name]


@pytest.fixture(scope="session")
def solver_us() -> Solver:
    return shared_solver("unsuccessful_search")


@pytest.fixture(scope="session")
def solver_nd() -> Solver:
    return shared_solver("node_depth")


@pytest.fixture(scope="session")
def solver_qs() -> Solver:
    return shared_solver("quickselect")


@pytest.fixture(scope="session")
def solver_bt() -> Solver:
    return shared_solver("broadcast_a_time")


@pytest.fixture(scope="session")
def exact_opts() -> SolveOptions:
    return SolveOptions(mode="exact", tail_eps=0.0)
