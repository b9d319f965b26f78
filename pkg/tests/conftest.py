import numpy as np
import pytest

from szegoscat import generate_family, validate_verblunsky

# Finite models whose densities the default grids resolve pointwise.
CORPUS = {
    "zeros": [],
    "half": [0.5],
    "three": [0.3, -0.2, 0.1],
    "random8": np.random.default_rng(7).uniform(-0.3, 0.3, 8),
    "cheb_u16": generate_family({"kind": "chebyshev_u_pattern", "N_trunc": 16}).gamma,
    "power64": generate_family({"kind": "power_law", "c": 0.3, "alpha": 0.7, "N_trunc": 64}).gamma,
    "logtemp64": generate_family({"kind": "log_tempered", "c": 0.2, "alpha": 0.9,
                                  "N_trunc": 64}).gamma,
}


@pytest.fixture(params=sorted(CORPUS))
def corpus_seq(request):
    return validate_verblunsky(CORPUS[request.param], label=request.param)


@pytest.fixture(scope="session")
def power2000():
    return generate_family({"kind": "power_law", "c": 0.3, "alpha": 0.7, "N_trunc": 2000})


# PASS/FAIL lines from the acceptance suite, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
