import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from handlang.vocabulary import default_vocabulary


@pytest.fixture(scope="session")
def cfg():
    return default_vocabulary()
