import sys
from pathlib import Path

import pytest

from pdgfix.bundleio import load_pattern_set
from pdgfix.patterns import BUILTIN_DIR

TESTS = Path(__file__).parent
CORPUS = TESTS / "corpus"
POSITIVES = CORPUS / "positives"
NEGATIVES = CORPUS / "negatives"
EXPECTED = CORPUS / "expected"

# oracles.py sits next to the tests
sys.path.insert(0, str(TESTS))

_BUNDLES = None


def builtin_bundles():
    global _BUNDLES
    if _BUNDLES is None:
        _BUNDLES = load_pattern_set(BUILTIN_DIR, strict=True)
    return _BUNDLES


def bundle_by_id(pid):
    return next(b for b in builtin_bundles() if b.id == pid)


def pattern_of(path: Path) -> str:
    return path.stem.split("_")[0]


def positive_files():
    return sorted(POSITIVES.glob("*.py"))


def negative_files():
    return sorted(NEGATIVES.glob("*.py"))


@pytest.fixture(scope="session")
def bundles():
    return builtin_bundles()


# criterion number -> (title, passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        line = f"[{'PASS' if ok else 'FAIL'}] {n}. {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
