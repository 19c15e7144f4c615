import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def pilot():
    """Frozen empirical constants; regenerate with ``dirmom pilot``."""
    data = json.loads((FIXTURES / "pilot_constants.json").read_text())
    return {k: v["frozen"] for k, v in data["constants"].items()}
