import json
import os
import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from invgen.metrics import MetricsConfig, analyze_corpus, corpus_files  # noqa: E402
from invgen.parser import parse_file  # noqa: E402

CORPUS = Path(__file__).resolve().parents[1] / "src" / "invgen" / "corpus"
GOLDEN = Path(__file__).parent / "golden"
SCHEMA = CORPUS.parent / "schemas" / "report.schema.json"

# lines printed by the acceptance suite, shown in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def corpus_path(name: str) -> Path:
    return CORPUS / f"{name}.mvl"


def load(name: str):
    return parse_file(corpus_path(name))


def validate(report: dict) -> None:
    jsonschema = pytest.importorskip("jsonschema")
    jsonschema.validate(report, json.loads(SCHEMA.read_text()))


def solver_command():
    cmd = os.environ.get("INVGEN_SOLVER")
    if cmd:
        return cmd
    return "z3 -in" if shutil.which("z3") else None


@pytest.fixture(scope="session")
def corpus():
    return {p.stem: parse_file(p) for p in corpus_files(CORPUS)}


@pytest.fixture(scope="session")
def metrics_report():
    return analyze_corpus(corpus_files(CORPUS), MetricsConfig(seed=0), workers=1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
