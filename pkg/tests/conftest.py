import json
import pathlib

import pytest

BASELINES = pathlib.Path(__file__).parent / "_baselines.json"


@pytest.fixture(scope="session")
def regression():
    """Pin a value on first run, compare against the stored pin afterwards."""
    stored = json.loads(BASELINES.read_text()) if BASELINES.exists() else {}

    def check(name: str, value: float, rel_tol: float = 1e-6):
        if name in stored:
            ref = stored[name]
            assert value == pytest.approx(ref, rel=rel_tol), \
                f"regression {name}: {value} vs pinned {ref}"
        else:
            stored[name] = value
            BASELINES.write_text(json.dumps(stored, indent=2, sort_keys=True))
        return value

    return check


def random_cone_values(rng, n, lo=0.1, hi=10.0):
    return rng.uniform(lo, hi, n)
