"""
Doctest configuration (pytest src --doctest-modules)
"""
import os
from pathlib import Path

import numpy as np
import pytest


@pytest.fixture(autouse=True)
def tmp_empty(tmp_path):
    """Run each doctest inside an empty temporary directory"""
    old = os.getcwd()
    os.chdir(str(tmp_path))
    yield str(Path(tmp_path).resolve())
    os.chdir(old)


@pytest.fixture(autouse=True)
def doctest_numpy(doctest_namespace):
    doctest_namespace["np"] = np
