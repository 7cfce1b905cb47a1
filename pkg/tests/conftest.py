import sys
from pathlib import Path

import pytest

from roundcheck._deep import _RECURSION_LIMIT
from roundcheck.syntax import parse_bean, parse_numfuzz

# deep walks raise the limit on first use; do it up front so hypothesis sees a fixed value
sys.setrecursionlimit(_RECURSION_LIMIT)

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


def nfz_file(name):
    return parse_numfuzz((CORPUS / "nfz" / name).read_text())


def bean_file(name):
    return parse_bean((CORPUS / "bean" / name).read_text())


@pytest.fixture
def corpus():
    return CORPUS
