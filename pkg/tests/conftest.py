import pytest


@pytest.fixture
def report_line(capsys):
    """Print a one-line PASS/FAIL verdict for an acceptance criterion, even under capture."""

    def emit(label: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}" + (f" :: {detail}" if detail else ""))

    return emit
