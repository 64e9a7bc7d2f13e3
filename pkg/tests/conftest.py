import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gradgraph.operators import OperatorParams, eval_G  # noqa: E402
from gradgraph.solution import QuadraticModel, subsolution  # noqa: E402

# anisotropic LogQuotient (b = 1) eigenvalue sets with delta0 > 2
ADMISSIBLE = [(1.0, 2.0, 2.0), (1.0, 1.0, 2.0), (0.5, 1.0, 1.5), (1.0, 1.5, 2.0, 3.0),
              (1.0, 1.2, 1.4, 1.6, 1.8)]


def lq_params(a, b=1.0):
    """LogQuotient parameters with C0 = G(a), so that A = diag(a) is compatible."""
    p = OperatorParams.log_quotient(b, len(a))
    return p.with_level(eval_G(p, a))


_CACHE = {}


def cached_subsolution(a, c=1.0, u0=0.0, b=1.0):
    key = (tuple(a), c, u0, b)
    if key not in _CACHE:
        model = QuadraticModel.from_eigenvalues(a, c=c, u0=u0)
        _CACHE[key] = subsolution(lq_params(a, b), model)
    return _CACHE[key]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
