"""State shared between test modules."""
import functools

from zenolab.model import custom_params
from zenolab.oracle import DiscretizedModel, diagonalize

SYNTHETIC = dict(cutoff_lambda=1.0, chi=1e-2, a=0.25)
N_MODES, X_MAX = 4000, 20.0

# pass/fail lines from test_acceptance, echoed in the pytest summary
LINES: list[str] = []


@functools.lru_cache(maxsize=1)
def synthetic_eigendata():
    """Diagonalized 4000-mode synthetic model with its build; about 20 s on first use."""
    params = custom_params(**SYNTHETIC)
    model = DiscretizedModel.build(params, N_MODES, X_MAX)
    return model, diagonalize(model, params)
