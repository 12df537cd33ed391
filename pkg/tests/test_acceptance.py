"""Acceptance suite: one printed PASS/FAIL line per check, one test per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines live; they are
also written to ``acceptance_results.txt`` beside this file's parent.
"""
import os

import pytest

from iterbm.acceptance import CRITERIA, format_line, run_criterion

SEED = int(os.environ.get("ITERBM_SEED", "42"), 0)
OUT = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                   "acceptance_results.txt")


@pytest.fixture(scope="module")
def ledger():
    lines = []
    yield lines
    with open(OUT, "w") as fh:
        fh.write("\n".join(lines) + "\n")


@pytest.mark.slow
@pytest.mark.parametrize("number", [c[0] for c in CRITERIA],
                         ids=[f"{c[0]:02d}-{c[1]}" for c in CRITERIA])
def test_criterion(number, ledger, capsys):
    title, reports, seconds = run_criterion(number, seed=SEED, workers=1)
    ok = all(r.passed for r in reports)
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title} ({seconds:.1f}s)"
    details = [format_line(number, title, r) for r in reports]
    ledger.append(line)
    ledger.extend("    " + d for d in details)
    with capsys.disabled():
        print("\n" + line)
        for d in details:
            print("    " + d)
    failed = [d for d, r in zip(details, reports) if not r.passed]
    assert not failed, "\n".join(failed)
