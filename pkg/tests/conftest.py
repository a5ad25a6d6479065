import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ebcert import ToleranceConfig


@pytest.fixture
def tol():
    return ToleranceConfig()
