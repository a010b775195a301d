from __future__ import annotations

import doctest
import importlib

import pytest

MODULES = [
    "khop",
    "khop.exactpoly",
    "khop.partitions",
    "khop.hopmoments",
    "khop.hopcumulants",
    "khop.variance",
    "khop.simulator",
    "khop.cltstats",
    "khop.oracles",
    "khop.cli",
]


@pytest.mark.parametrize("name", MODULES)
def test_docstring_examples(name):
    result = doctest.testmod(importlib.import_module(name), optionflags=doctest.ELLIPSIS)
    assert result.failed == 0


def test_readme_examples():
    from pathlib import Path

    readme = Path(__file__).resolve().parents[1] / "README.md"
    result = doctest.testfile(str(readme), module_relative=False)
    assert result.failed == 0
