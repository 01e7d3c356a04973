from pathlib import Path

import pytest

from schedcheck.frontend import load

PKG = Path(__file__).resolve().parents[1] / "src" / "schedcheck"
CORPUS = PKG / "corpus"
DATA = PKG / "data"


def corpus_files():
    return sorted(CORPUS.glob("*.mtl"))


def expected_of(path: Path) -> str:
    return path.with_suffix(".expected").read_text().strip()


@pytest.fixture
def running_example():
    return load((CORPUS / "running_example.mtl").read_text())
